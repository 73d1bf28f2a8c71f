#include "ensel/serialize.hpp"

#include "ensel/task.hpp"

using nlohmann::json;

namespace ensel {

namespace {

json optional_to_json(const std::optional<double>& v) {
    if (v.has_value()) return quantize9(*v);
    return nullptr;
}

std::optional<double> optional_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

}  // namespace

json selection_config_to_json(const SelectionConfig& cfg) {
    return {{"method", cfg.method == SelectionMethod::qo ? "qo" : "qdo"},
            {"batch_size", cfg.batch_size},
            {"archive_size", cfg.archive_size},
            {"init", init_name(cfg.init)},
            {"sampling", sampling_name(cfg.sampling)},
            {"crossover", crossover_name(cfg.crossover)},
            {"seed", cfg.seed}};
}

SelectionConfig selection_config_from_json(const json& j, SelectionConfig base) {
    if (j.contains("method")) {
        const std::string m = j.at("method").get<std::string>();
        if (m == "qo") {
            base.method = SelectionMethod::qo;
        } else if (m == "qdo") {
            base.method = SelectionMethod::qdo;
        } else {
            throw Error("unknown selection method '" + m + "' (expected qo or qdo)");
        }
    }
    if (j.contains("batch_size")) base.batch_size = j.at("batch_size").get<int>();
    if (j.contains("archive_size")) base.archive_size = j.at("archive_size").get<int>();
    if (j.contains("init")) base.init = parse_init(j.at("init").get<std::string>());
    if (j.contains("sampling")) base.sampling = parse_sampling(j.at("sampling").get<std::string>());
    if (j.contains("crossover")) {
        base.crossover = parse_crossover(j.at("crossover").get<std::string>());
    }
    if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
    return base;
}

json run_result_to_json(const RunResult& r) {
    json weights = json::array();
    for (double w : r.weights) weights.push_back(quantize9(w));
    return {{"task", r.task_name},
            {"method", r.method},
            {"config_id", r.config_id},
            {"seed", r.seed},
            {"prune", {{"strategy", r.prune.strategy_name()}, {"n", r.prune.n}}},
            {"config", selection_config_to_json(r.config)},
            {"model_ids", r.model_ids},
            {"weights", weights},
            {"validation_score", quantize9(r.validation_score)},
            {"test_score", optional_to_json(r.test_score)},
            {"eval_count", r.eval_count},
            {"wall_time_s", quantize9(r.wall_time_s)},
            {"ensemble_size", r.ensemble_size}};
}

RunResult run_result_from_json(const json& j) {
    RunResult r;
    r.task_name = j.at("task").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.config_id = j.at("config_id").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.prune = PruneSpec::parse(j.at("prune").at("strategy").get<std::string>(),
                               j.at("prune").at("n").get<int>());
    r.config = selection_config_from_json(j.at("config"));
    r.model_ids = j.at("model_ids").get<std::vector<std::string>>();
    r.weights = j.at("weights").get<std::vector<double>>();
    r.validation_score = j.at("validation_score").get<double>();
    r.test_score = optional_from_json(j.at("test_score"));
    r.eval_count = j.at("eval_count").get<std::size_t>();
    r.wall_time_s = j.at("wall_time_s").get<double>();
    r.ensemble_size = j.at("ensemble_size").get<int>();
    return r;
}

std::vector<GridEntry> parse_grid(const json& doc) {
    if (!doc.contains("entries") || !doc.at("entries").is_array() || doc.at("entries").empty()) {
        throw Error("grid file needs a non-empty 'entries' array");
    }
    std::vector<GridEntry> entries;
    for (const json& e : doc.at("entries")) {
        GridEntry entry;
        entry.id = e.at("id").get<std::string>();
        entry.method = parse_method(e.at("method").get<std::string>());
        if (e.contains("seed")) entry.seed = e.at("seed").get<std::uint64_t>();
        if (e.contains("prune")) {
            entry.prune = PruneSpec::parse(e.at("prune").at("strategy").get<std::string>(),
                                           e.at("prune").at("n").get<int>());
        }
        if (e.contains("config")) {
            entry.config = selection_config_from_json(e.at("config"));
        }
        for (const GridEntry& prev : entries) {
            if (prev.id == entry.id) throw Error("duplicate grid entry id '" + entry.id + "'");
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

json bench_table_to_json(const BenchTable& t) {
    json validation = json::array();
    json test = json::array();
    for (std::size_t d = 0; d < t.datasets.size(); ++d) {
        json vrow = json::array();
        json trow = json::array();
        for (std::size_t c = 0; c < t.configs.size(); ++c) {
            vrow.push_back(quantize9(t.validation[d][c]));
            trow.push_back(optional_to_json(t.test[d][c]));
        }
        validation.push_back(std::move(vrow));
        test.push_back(std::move(trow));
    }
    json baseline_val = json::array();
    json baseline_test = json::array();
    for (std::size_t d = 0; d < t.datasets.size(); ++d) {
        baseline_val.push_back(quantize9(t.baseline_validation[d]));
        baseline_test.push_back(optional_to_json(t.baseline_test[d]));
    }
    return {{"datasets", t.datasets},
            {"configs", t.configs},
            {"config_methods", t.config_methods},
            {"validation_scores", validation},
            {"test_scores", test},
            {"baseline_validation", baseline_val},
            {"baseline_test", baseline_test}};
}

BenchTable bench_table_from_json(const json& j) {
    BenchTable t;
    t.datasets = j.at("datasets").get<std::vector<std::string>>();
    t.configs = j.at("configs").get<std::vector<std::string>>();
    t.config_methods = j.at("config_methods").get<std::vector<std::string>>();
    for (const json& row : j.at("validation_scores")) {
        t.validation.push_back(row.get<std::vector<double>>());
    }
    for (const json& row : j.at("test_scores")) {
        std::vector<std::optional<double>> out;
        for (const json& cell : row) out.push_back(optional_from_json(cell));
        t.test.push_back(std::move(out));
    }
    t.baseline_validation = j.at("baseline_validation").get<std::vector<double>>();
    for (const json& cell : j.at("baseline_test")) {
        t.baseline_test.push_back(optional_from_json(cell));
    }
    return t;
}

ScoreTable to_score_table(const BenchTable& t, bool test_split) {
    ScoreTable s;
    s.datasets = t.datasets;
    s.configs = t.configs;
    if (!test_split) {
        s.scores = t.validation;
        s.baseline = t.baseline_validation;
    } else {
        for (std::size_t d = 0; d < t.datasets.size(); ++d) {
            std::vector<double> row;
            for (std::size_t c = 0; c < t.configs.size(); ++c) {
                if (!t.test[d][c].has_value()) {
                    throw Error("dataset '" + t.datasets[d] + "' has no test score for '" +
                                t.configs[c] + "'");
                }
                row.push_back(*t.test[d][c]);
            }
            s.scores.push_back(std::move(row));
            if (!t.baseline_test[d].has_value()) {
                throw Error("dataset '" + t.datasets[d] + "' has no test baseline score");
            }
            s.baseline.push_back(*t.baseline_test[d]);
        }
    }
    s.validate();
    return s;
}

}  // namespace ensel
