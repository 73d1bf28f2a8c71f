#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "ensel/core.hpp"
#include "ensel/synth.hpp"
#include "ensel/task.hpp"
#include "helpers.hpp"

using namespace ensel;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("ensel_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void spit(const fs::path& file, const std::string& content) {
    std::ofstream out(file, std::ios::binary);
    out << content;
}

}  // namespace

TEST_CASE("nine significant digit formatting") {
    CHECK(format_g9(0.5) == "0.5");
    CHECK(format_g9(0.0) == "0");
    CHECK(format_g9(-2.0) == "-2");
    CHECK(format_g9(1.0 / 3.0) == "0.333333333");
    CHECK(format_g9(123456789.0) == "123456789");

    SUBCASE("quantization is idempotent") {
        Rng rng(40);
        for (int t = 0; t < 500; ++t) {
            const double v = (rng.uniform() - 0.5) * std::pow(10.0, double(rng.index(7)) - 3.0);
            const double q = quantize9(v);
            CHECK(quantize9(q) == q);
            CHECK(format_g9(q) == format_g9(v));
            if (v != 0.0) CHECK(std::abs(q - v) <= 5e-9 * std::abs(v));
        }
    }
    SUBCASE("short decimals survive exactly") {
        for (double v : {0.25, 0.1, 1e-4, 3.0, 0.875}) {
            CHECK(quantize9(v) == v);
        }
    }
}

TEST_CASE("synthetic task generation") {
    SynthSpec spec;
    spec.n_models = 6;
    spec.n_instances = 40;
    spec.n_classes = 3;
    spec.metric = MetricKind::balanced_accuracy;
    spec.seed = 99;

    Task task = synth_task(spec);
    CHECK(task.name == "synth-99");
    CHECK(task.n_classes == 3);
    CHECK(task.metric.kind == MetricKind::balanced_accuracy);
    REQUIRE(task.validation.n_models() == 6);
    REQUIRE(task.test.n_models() == 6);
    CHECK(task.validation.labels.size() == 40);
    CHECK(task.test.labels.size() == 40);
    CHECK(task.validation.model_ids == task.test.model_ids);

    SUBCASE("the same spec reproduces the bundle bit for bit") {
        Task again = synth_task(spec);
        CHECK(again.validation.labels == task.validation.labels);
        CHECK(again.test.labels == task.test.labels);
        CHECK(again.validation.val_scores == task.validation.val_scores);
        for (std::size_t i = 0; i < 6; ++i) {
            CHECK((again.validation.probabilities[i] - task.validation.probabilities[i])
                      .cwiseAbs()
                      .maxCoeff() == 0.0);
            CHECK((again.test.probabilities[i] - task.test.probabilities[i])
                      .cwiseAbs()
                      .maxCoeff() == 0.0);
        }
        Task other = synth_task([&] {
            SynthSpec s = spec;
            s.seed = 100;
            return s;
        }());
        CHECK(other.validation.labels != task.validation.labels);
    }
    SUBCASE("validation scores are the models' own metric scores") {
        for (std::size_t i = 0; i < 6; ++i) {
            const double direct =
                task.metric.score(task.validation.probabilities[i], task.validation.labels);
            CHECK(task.validation.val_scores[i] == quantize9(direct));
        }
    }
    SUBCASE("several algorithm families appear") {
        std::set<std::string> fams(task.validation.algorithms.begin(),
                                   task.validation.algorithms.end());
        CHECK(fams.size() >= 2);
    }
    SUBCASE("every model carries numeric and categorical hyperparameters") {
        for (const ConfigMap& cfg : task.validation.configs) {
            int numeric = 0, categorical = 0;
            for (const auto& [key, value] : cfg) {
                if (std::holds_alternative<double>(value)) ++numeric;
                else ++categorical;
            }
            CHECK(numeric >= 2);
            CHECK(categorical >= 1);
        }
    }
    SUBCASE("a custom name wins over the default") {
        SynthSpec named = spec;
        named.name = "my-task";
        CHECK(synth_task(named).name == "my-task");
    }
    SUBCASE("knob validation") {
        SynthSpec bad = spec;
        bad.n_models = 0;
        CHECK_THROWS_AS(synth_task(bad), Error);
        bad = spec;
        bad.n_instances = 1;
        CHECK_THROWS_AS(synth_task(bad), Error);
        bad = spec;
        bad.n_classes = 1;
        CHECK_THROWS_AS(synth_task(bad), Error);
        bad = spec;
        bad.accuracy_lo = 0.9;
        bad.accuracy_hi = 0.2;
        CHECK_THROWS_AS(synth_task(bad), Error);
        bad = spec;
        bad.correlation = 1.5;
        CHECK_THROWS_AS(synth_task(bad), Error);
    }
}

TEST_CASE("full correlation collapses every model onto the same mistakes") {
    SynthSpec spec;
    spec.n_models = 7;
    spec.n_instances = 200;
    spec.n_classes = 2;
    spec.correlation = 1.0;
    spec.seed = 321;

    const Task task = synth_task(spec);
    const auto& val = task.validation;
    std::vector<bool> first;
    for (std::size_t i = 0; i < val.n_models(); ++i) {
        const std::vector<int> pred = predict_labels(val.probabilities[i]);
        std::vector<bool> wrong(pred.size());
        for (std::size_t t = 0; t < pred.size(); ++t) wrong[t] = pred[t] != val.labels[t];
        if (i == 0) first = wrong;
        else CHECK(wrong == first);
    }
}

TEST_CASE("without correlation the accuracy band is met empirically") {
    SynthSpec spec;
    spec.n_models = 8;
    spec.n_instances = 2000;
    spec.n_classes = 2;
    spec.accuracy_lo = 0.68;
    spec.accuracy_hi = 0.72;
    spec.correlation = 0.0;
    spec.seed = 654;

    const Task task = synth_task(spec);
    const auto& val = task.validation;
    for (std::size_t i = 0; i < val.n_models(); ++i) {
        const std::vector<int> pred = predict_labels(val.probabilities[i]);
        int hits = 0;
        for (std::size_t t = 0; t < pred.size(); ++t) hits += pred[t] == val.labels[t];
        const double acc = static_cast<double>(hits) / static_cast<double>(pred.size());
        CHECK(acc >= 0.65);
        CHECK(acc <= 0.75);
    }
}

TEST_CASE("task round-trips through the on-disk layout") {
    SynthSpec spec;
    spec.n_models = 4;
    spec.n_instances = 25;
    spec.n_classes = 2;
    spec.seed = 7;
    Task task = synth_task(spec);

    const fs::path dir = fresh_dir("roundtrip");
    save_task(task, dir);

    REQUIRE(fs::exists(dir / "task.json"));
    REQUIRE(fs::exists(dir / "val" / "labels.csv"));
    REQUIRE(fs::exists(dir / "test" / "labels.csv"));
    REQUIRE(fs::exists(dir / "val" / ("pred_" + task.validation.model_ids[0] + ".csv")));

    Task loaded = load_task(dir);
    CHECK(loaded.name == task.name);
    CHECK(loaded.n_classes == 2);
    CHECK(loaded.metric.kind == task.metric.kind);
    CHECK(loaded.validation.model_ids == task.validation.model_ids);
    CHECK(loaded.validation.algorithms == task.validation.algorithms);
    CHECK(loaded.validation.configs == task.validation.configs);
    CHECK(loaded.validation.val_scores == task.validation.val_scores);
    CHECK(loaded.validation.labels == task.validation.labels);
    CHECK(loaded.test.labels == task.test.labels);
    for (std::size_t i = 0; i < 4; ++i) {
        const Matrix& a = task.validation.probabilities[i];
        const Matrix& b = loaded.validation.probabilities[i];
        REQUIRE(a.rows() == b.rows());
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
    }

    SUBCASE("saving the loaded task reproduces the files byte for byte") {
        const fs::path dir2 = fresh_dir("roundtrip2");
        save_task(loaded, dir2);
        CHECK(slurp(dir2 / "task.json") == slurp(dir / "task.json"));
        CHECK(slurp(dir2 / "val" / "labels.csv") == slurp(dir / "val" / "labels.csv"));
        for (const std::string& id : task.validation.model_ids) {
            CHECK(slurp(dir2 / "val" / ("pred_" + id + ".csv")) ==
                  slurp(dir / "val" / ("pred_" + id + ".csv")));
        }
    }
    SUBCASE("a test split without labels loads as unlabelled") {
        const fs::path dir3 = fresh_dir("nolabels");
        save_task(task, dir3);
        fs::remove(dir3 / "test" / "labels.csv");
        Task unlabelled = load_task(dir3);
        CHECK(unlabelled.test.labels.empty());
        CHECK(unlabelled.validation.labels.size() == 25);
    }
    fs::remove_all(dir);
}

TEST_CASE("task loading rejects corrupt input") {
    SynthSpec spec;
    spec.n_models = 3;
    spec.n_instances = 12;
    spec.seed = 13;
    Task task = synth_task(spec);
    const std::string id0 = task.validation.model_ids[0];

    SUBCASE("missing metadata file") {
        const fs::path dir = fresh_dir("nometa");
        save_task(task, dir);
        fs::remove(dir / "task.json");
        CHECK_THROWS_AS(load_task(dir), Error);
        fs::remove_all(dir);
    }
    SUBCASE("wrong prediction header") {
        const fs::path dir = fresh_dir("badheader");
        save_task(task, dir);
        const fs::path pred = dir / "val" / ("pred_" + id0 + ".csv");
        std::string content = slurp(pred);
        spit(pred, "x0,x1\n" + content.substr(content.find('\n') + 1));
        CHECK_THROWS_AS(load_task(dir), Error);
        fs::remove_all(dir);
    }
    SUBCASE("non-numeric probability") {
        const fs::path dir = fresh_dir("badnumber");
        save_task(task, dir);
        const fs::path pred = dir / "val" / ("pred_" + id0 + ".csv");
        std::string content = slurp(pred);
        const std::size_t line2 = content.find('\n') + 1;
        const std::size_t comma = content.find(',', line2);
        content.replace(line2, comma - line2, "abc");
        spit(pred, content);
        CHECK_THROWS_AS(load_task(dir), Error);
        fs::remove_all(dir);
    }
    SUBCASE("label outside the class range") {
        const fs::path dir = fresh_dir("badlabel");
        save_task(task, dir);
        std::string labels = slurp(dir / "val" / "labels.csv");
        labels.replace(0, labels.find('\n'), "9");
        spit(dir / "val" / "labels.csv", labels);
        CHECK_THROWS_AS(load_task(dir), Error);
        fs::remove_all(dir);
    }
    SUBCASE("missing validation labels") {
        const fs::path dir = fresh_dir("misslabels");
        save_task(task, dir);
        fs::remove(dir / "val" / "labels.csv");
        CHECK_THROWS_AS(load_task(dir), Error);
        fs::remove_all(dir);
    }
    SUBCASE("missing prediction file") {
        const fs::path dir = fresh_dir("misspred");
        save_task(task, dir);
        fs::remove(dir / "val" / ("pred_" + id0 + ".csv"));
        CHECK_THROWS_AS(load_task(dir), Error);
        fs::remove_all(dir);
    }
}

TEST_CASE("pruning a task keeps both splits aligned") {
    SynthSpec spec;
    spec.n_models = 8;
    spec.n_instances = 30;
    spec.seed = 21;
    Task task = synth_task(spec);

    PruneSpec prune;
    prune.strategy = PruneSpec::Strategy::top_n;
    prune.n = 3;
    Task pruned = prune_task(task, prune);

    REQUIRE(pruned.validation.n_models() == 3);
    CHECK(pruned.test.model_ids == pruned.validation.model_ids);
    CHECK(pruned.name == task.name);
    CHECK(pruned.n_classes == task.n_classes);

    // the kept models carry their original metadata and predictions
    for (std::size_t i = 0; i < 3; ++i) {
        const std::string& id = pruned.validation.model_ids[i];
        const auto it = std::find(task.validation.model_ids.begin(),
                                  task.validation.model_ids.end(), id);
        REQUIRE(it != task.validation.model_ids.end());
        const std::size_t src = it - task.validation.model_ids.begin();
        CHECK(pruned.validation.val_scores[i] == task.validation.val_scores[src]);
        CHECK((pruned.validation.probabilities[i] - task.validation.probabilities[src])
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
        CHECK((pruned.test.probabilities[i] - task.test.probabilities[src])
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
    }
}
