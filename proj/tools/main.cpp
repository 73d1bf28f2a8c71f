#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ensel/report.hpp"
#include "ensel/runner.hpp"
#include "ensel/serialize.hpp"
#include "ensel/synth.hpp"
#include "ensel/task.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t fresh_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ensel::Error("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ensel::Error(path.string() + ": " + e.what());
    }
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ensel::Error("cannot write " + path.string());
    out << text;
    if (!out) throw ensel::Error("write failed for " + path.string());
}

// Filesystem-safe cell file stem; distinct names must stay distinct.
std::string sanitize(const std::string& name) {
    std::string out;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '.' || c == '-';
        out.push_back(ok ? c : '_');
    }
    return out;
}

struct SelectFlags {
    std::string task_dir;
    std::string method = "ges-h";
    std::string prune = "top_n";
    int prune_n = 50;
    std::string config_file;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out_file;
    // individual config overrides
    int batch_size = 0;
    int archive_size = 0;
    std::string init;
    std::string sampling;
    std::string crossover;
    bool batch_given = false, archive_given = false;
};

int cmd_select(const SelectFlags& f) {
    const ensel::Method method = ensel::parse_method(f.method);
    const ensel::PruneSpec prune = ensel::PruneSpec::parse(f.prune, f.prune_n);
    const ensel::Task task = ensel::load_task(f.task_dir);

    ensel::SelectionConfig cfg;
    if (!f.config_file.empty()) cfg = ensel::selection_config_from_json(read_json_file(f.config_file));
    if (f.batch_given) cfg.batch_size = f.batch_size;
    if (f.archive_given) cfg.archive_size = f.archive_size;
    if (!f.init.empty()) cfg.init = ensel::parse_init(f.init);
    if (!f.sampling.empty()) cfg.sampling = ensel::parse_sampling(f.sampling);
    if (!f.crossover.empty()) cfg.crossover = ensel::parse_crossover(f.crossover);

    const std::uint64_t seed = f.seed_given ? f.seed : fresh_seed();
    const ensel::RunResult result = ensel::run_method(task, method, cfg, prune, seed);

    json doc = json::array({ensel::run_result_to_json(result)});
    write_text_file(f.out_file, doc.dump(2) + "\n");

    std::cout << result.method << " on " << result.task_name << ": validation "
              << ensel::format_g9(result.validation_score);
    if (result.test_score) std::cout << ", test " << ensel::format_g9(*result.test_score);
    std::cout << " (seed " << seed << ", " << result.eval_count << " evaluations)\n";
    return 0;
}

struct BenchFlags {
    std::string grid_file;
    std::vector<std::string> task_dirs;
    std::string out_dir;
    int jobs = 1;
};

struct Cell {
    std::size_t task = 0;
    std::size_t entry = 0;
    fs::path file;
    std::optional<ensel::RunResult> result;
    std::string error;
};

int cmd_bench(const BenchFlags& f) {
    const std::vector<ensel::GridEntry> entries = ensel::parse_grid(read_json_file(f.grid_file));
    if (f.jobs < 1) throw ensel::Error("--jobs must be at least 1");

    std::vector<ensel::Task> tasks;
    for (const std::string& dir : f.task_dirs) tasks.push_back(ensel::load_task(dir));

    const fs::path out_dir = f.out_dir;
    const fs::path cell_dir = out_dir / "cells";
    fs::create_directories(cell_dir);

    std::vector<Cell> cells;
    std::map<std::string, std::string> stems;  // sanitized -> original, collision guard
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        for (std::size_t e = 0; e < entries.size(); ++e) {
            Cell cell;
            cell.task = t;
            cell.entry = e;
            const std::string stem = sanitize(tasks[t].name) + "__" + sanitize(entries[e].id);
            const std::string key = tasks[t].name + "\n" + entries[e].id;
            auto [it, fresh] = stems.emplace(stem, key);
            if (!fresh && it->second != key) {
                throw ensel::Error("cell file name clash between '" + it->second + "' and '" +
                                   key + "'");
            }
            cell.file = cell_dir / (stem + ".json");
            cells.push_back(std::move(cell));
        }
    }

    // Resume: a cell with a readable result file is not rerun.
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (fs::exists(cells[i].file)) {
            try {
                ensel::run_result_from_json(read_json_file(cells[i].file));
                continue;
            } catch (const std::exception&) {
                // stale or truncated; recompute
            }
        }
        todo.push_back(i);
    }

    auto run_cell = [&](std::size_t i) {
        Cell& cell = cells[i];
        const ensel::GridEntry& entry = entries[cell.entry];
        try {
            const ensel::RunResult r = ensel::run_method(tasks[cell.task], entry.method,
                                                         entry.config, entry.prune, entry.seed,
                                                         entry.id);
            write_text_file(cell.file, ensel::run_result_to_json(r).dump(2) + "\n");
        } catch (const std::exception& e) {
            cell.error = e.what();
            fs::path err = cell.file;
            err.replace_extension(".error.txt");
            write_text_file(err, std::string(e.what()) + "\n");
        }
    };

    if (f.jobs <= 1 || todo.size() <= 1) {
        for (std::size_t i : todo) run_cell(i);
    } else {
        std::atomic<std::size_t> cursor{0};
        std::vector<std::thread> workers;
        const std::size_t n = std::min<std::size_t>(f.jobs, todo.size());
        for (std::size_t w = 0; w < n; ++w) {
            workers.emplace_back([&] {
                for (;;) {
                    const std::size_t at = cursor.fetch_add(1);
                    if (at >= todo.size()) return;
                    run_cell(todo[at]);
                }
            });
        }
        for (std::thread& w : workers) w.join();
    }

    // The table is assembled from the written files only, so a resumed run
    // and a fresh run produce identical tables.
    std::size_t failures = 0;
    for (Cell& cell : cells) {
        try {
            cell.result = ensel::run_result_from_json(read_json_file(cell.file));
        } catch (const std::exception& e) {
            ++failures;
            if (cell.error.empty()) cell.error = e.what();
            std::cerr << "cell " << tasks[cell.task].name << " / " << entries[cell.entry].id
                      << " failed: " << cell.error << "\n";
        }
    }
    if (failures > 0) {
        std::cerr << failures << " of " << cells.size()
                  << " cells failed; details in " << cell_dir.string() << "/*.error.txt\n";
        return 2;
    }

    ensel::BenchTable table;
    for (const ensel::Task& task : tasks) table.datasets.push_back(task.name);
    for (const ensel::GridEntry& entry : entries) {
        table.configs.push_back(entry.id);
        table.config_methods.push_back(ensel::method_name(entry.method));
    }
    table.validation.assign(tasks.size(), std::vector<double>(entries.size(), 0.0));
    table.test.assign(tasks.size(), std::vector<std::optional<double>>(entries.size()));
    for (const Cell& cell : cells) {
        table.validation[cell.task][cell.entry] = cell.result->validation_score;
        table.test[cell.task][cell.entry] = cell.result->test_score;
    }
    // Baseline: the single best model of the full pool by validation score.
    for (const ensel::Task& task : tasks) {
        const std::size_t best = ensel::single_best_index(task.validation);
        const double val = task.metric.score(task.validation.probabilities[best],
                                             task.validation.labels);
        table.baseline_validation.push_back(ensel::quantize9(val));
        if (task.test.has_labels()) {
            const double ts = task.metric.score(task.test.probabilities[best], task.test.labels);
            table.baseline_test.push_back(ensel::quantize9(ts));
        } else {
            table.baseline_test.push_back(std::nullopt);
        }
    }

    write_text_file(out_dir / "table.json", ensel::bench_table_to_json(table).dump(2) + "\n");
    std::cout << "wrote " << (out_dir / "table.json").string() << " (" << tasks.size()
              << " tasks x " << entries.size() << " configs, " << todo.size() << " computed, "
              << cells.size() - todo.size() << " reused)\n";
    return 0;
}

struct SynthFlags {
    ensel::SynthSpec spec;
    std::string metric = "roc_auc";
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string name;
    std::string out_dir;
};

int cmd_synth(const SynthFlags& f) {
    ensel::SynthSpec spec = f.spec;
    spec.metric = ensel::Metric::parse(f.metric).kind;
    spec.seed = f.seed_given ? f.seed : fresh_seed();
    spec.name = f.name;
    const ensel::Task task = ensel::synth_task(spec);
    ensel::save_task(task, f.out_dir);
    std::cout << "wrote task '" << task.name << "' to " << f.out_dir << " (seed " << spec.seed
              << ", " << spec.n_models << " models, " << spec.n_instances << " instances, "
              << spec.n_classes << " classes)\n";
    return 0;
}

struct ReportFlags {
    std::string table_file;
    std::string split = "validation";
    std::string out_dir;
};

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

int cmd_report(const ReportFlags& f) {
    if (f.split != "validation" && f.split != "test") {
        throw ensel::Error("--split must be validation or test");
    }
    const ensel::BenchTable bench = ensel::bench_table_from_json(read_json_file(f.table_file));
    const ensel::ScoreTable table = ensel::to_score_table(bench, f.split == "test");
    const fs::path out_dir = f.out_dir;
    fs::create_directories(out_dir);

    // Normalised improvement, with the baseline as a reference column.
    const std::vector<std::vector<double>> ni = ensel::normalized_improvement(table);
    {
        std::ostringstream csv;
        csv << "dataset";
        for (const std::string& c : table.configs) csv << "," << csv_field(c);
        csv << ",baseline\n";
        json rows = json::array();
        for (std::size_t d = 0; d < table.datasets.size(); ++d) {
            double s_star = table.baseline[d];
            for (double s : table.scores[d]) s_star = std::max(s_star, s);
            const double base_ni = ensel::normalized_improvement_value(table.baseline[d],
                                                                       table.baseline[d], s_star);
            csv << csv_field(table.datasets[d]);
            json row = {{"dataset", table.datasets[d]}};
            for (std::size_t c = 0; c < table.configs.size(); ++c) {
                csv << "," << ensel::format_g9(ni[d][c]);
                row[table.configs[c]] = ensel::quantize9(ni[d][c]);
            }
            csv << "," << ensel::format_g9(base_ni) << "\n";
            row["baseline"] = ensel::quantize9(base_ni);
            rows.push_back(std::move(row));
        }
        write_text_file(out_dir / "normalized_improvement.csv", csv.str());
        write_text_file(out_dir / "normalized_improvement.json", rows.dump(2) + "\n");
    }

    // Mean ranks over the configs plus the baseline.
    {
        ensel::ScoreTable ranked = table;
        ranked.configs.push_back("baseline");
        for (std::size_t d = 0; d < ranked.datasets.size(); ++d) {
            ranked.scores[d].push_back(ranked.baseline[d]);
        }
        const std::vector<double> ranks = ensel::mean_ranks(ranked);
        std::ostringstream csv;
        csv << "config,mean_rank\n";
        json doc = json::array();
        for (std::size_t c = 0; c < ranked.configs.size(); ++c) {
            csv << csv_field(ranked.configs[c]) << "," << ensel::format_g9(ranks[c]) << "\n";
            doc.push_back({{"config", ranked.configs[c]},
                           {"mean_rank", ensel::quantize9(ranks[c])}});
        }
        write_text_file(out_dir / "mean_ranks.csv", csv.str());
        write_text_file(out_dir / "mean_ranks.json", doc.dump(2) + "\n");
    }

    // Leave-one-out config selection, normalised within each method's own
    // configs.
    if (table.datasets.size() >= 2) {
        std::vector<std::string> methods;
        for (const std::string& m : bench.config_methods) {
            if (std::find(methods.begin(), methods.end(), m) == methods.end()) {
                methods.push_back(m);
            }
        }
        std::ostringstream csv;
        csv << "method,dataset,selected_config\n";
        json doc = json::array();
        for (const std::string& method : methods) {
            ensel::ScoreTable sub;
            sub.datasets = table.datasets;
            sub.baseline = table.baseline;
            for (std::size_t c = 0; c < table.configs.size(); ++c) {
                if (bench.config_methods[c] != method) continue;
                sub.configs.push_back(table.configs[c]);
            }
            for (std::size_t d = 0; d < table.datasets.size(); ++d) {
                std::vector<double> row;
                for (std::size_t c = 0; c < table.configs.size(); ++c) {
                    if (bench.config_methods[c] != method) continue;
                    row.push_back(table.scores[d][c]);
                }
                sub.scores.push_back(std::move(row));
            }
            const std::vector<std::string> picks = ensel::loo_cv_select(sub);
            for (std::size_t d = 0; d < sub.datasets.size(); ++d) {
                csv << csv_field(method) << "," << csv_field(sub.datasets[d]) << ","
                    << csv_field(picks[d]) << "\n";
                doc.push_back({{"method", method},
                               {"dataset", sub.datasets[d]},
                               {"selected_config", picks[d]}});
            }
        }
        write_text_file(out_dir / "loo_selection.csv", csv.str());
        write_text_file(out_dir / "loo_selection.json", doc.dump(2) + "\n");
    } else {
        std::cout << "skipping leave-one-out selection: needs at least 2 datasets\n";
    }

    std::cout << "wrote " << f.split << " reports to " << out_dir.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"post hoc ensemble selection over model prediction pools"};
    app.require_subcommand(1);

    SelectFlags sf;
    CLI::App* select = app.add_subcommand("select", "run one selection method on one task");
    select->add_option("--task", sf.task_dir, "task directory")->required();
    select->add_option("--method", sf.method,
                       "single_best, ges-h, ges-f, qo-es or qdo-es")->required();
    select->add_option("--prune", sf.prune, "pool pruning: top_n or silo_top_n");
    select->add_option("--prune-n", sf.prune_n, "pool size kept by pruning");
    select->add_option("--config", sf.config_file, "selection config JSON file");
    CLI::Option* sseed = select->add_option("--seed", sf.seed, "run seed (generated when absent)");
    select->add_option("--out", sf.out_file, "output JSON file")->required();
    CLI::Option* sbatch = select->add_option("--batch-size", sf.batch_size, "offspring per batch");
    CLI::Option* sarch = select->add_option("--archive-size", sf.archive_size, "archive capacity");
    select->add_option("--init", sf.init, "population init: l1, l2_single_best or random_l2");
    select->add_option("--sampling", sf.sampling,
                       "parent sampling: deterministic, tournament or dynamic");
    select->add_option("--crossover", sf.crossover, "crossover: two_point, average or none");

    BenchFlags bf;
    CLI::App* bench = app.add_subcommand("bench", "run a config grid over a set of tasks");
    bench->add_option("--grid", bf.grid_file, "grid JSON file")->required();
    bench->add_option("--task", bf.task_dirs, "task directory (repeatable)")->required();
    bench->add_option("--out", bf.out_dir, "output directory")->required();
    bench->add_option("--jobs", bf.jobs, "concurrent grid cells");

    SynthFlags yf;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic task bundle");
    synth->add_option("--out", yf.out_dir, "task directory to create")->required();
    synth->add_option("--models", yf.spec.n_models, "pool size");
    synth->add_option("--instances", yf.spec.n_instances, "instances per split");
    synth->add_option("--classes", yf.spec.n_classes, "number of classes");
    synth->add_option("--accuracy-lo", yf.spec.accuracy_lo, "lower per-model accuracy bound");
    synth->add_option("--accuracy-hi", yf.spec.accuracy_hi, "upper per-model accuracy bound");
    synth->add_option("--correlation", yf.spec.correlation, "shared-error mixing in [0, 1]");
    synth->add_option("--metric", yf.metric, "roc_auc or balanced_accuracy");
    CLI::Option* yseed = synth->add_option("--seed", yf.seed, "generator seed (generated when absent)");
    synth->add_option("--name", yf.name, "task name (default synth-<seed>)");

    ReportFlags rf;
    CLI::App* report = app.add_subcommand("report", "summarise a bench score table");
    report->add_option("--table", rf.table_file, "table.json from bench")->required();
    report->add_option("--split", rf.split, "validation or test");
    report->add_option("--out", rf.out_dir, "report output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (select->parsed()) {
            sf.seed_given = sseed->count() > 0;
            sf.batch_given = sbatch->count() > 0;
            sf.archive_given = sarch->count() > 0;
            return cmd_select(sf);
        }
        if (bench->parsed()) return cmd_bench(bf);
        if (synth->parsed()) {
            yf.seed_given = yseed->count() > 0;
            return cmd_synth(yf);
        }
        if (report->parsed()) return cmd_report(rf);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
