#include "ensel/runner.hpp"

#include <atomic>
#include <chrono>
#include <thread>

#include "ensel/ges.hpp"

namespace ensel {

Method parse_method(const std::string& name) {
    if (name == "single_best") return Method::single_best;
    if (name == "ges-h") return Method::ges_h;
    if (name == "ges-f") return Method::ges_f;
    if (name == "qo-es") return Method::qo_es;
    if (name == "qdo-es") return Method::qdo_es;
    throw Error("unknown method '" + name +
                "' (expected single_best, ges-h, ges-f, qo-es or qdo-es)");
}

std::string method_name(Method m) {
    switch (m) {
        case Method::single_best: return "single_best";
        case Method::ges_h: return "ges-h";
        case Method::ges_f: return "ges-f";
        case Method::qo_es: return "qo-es";
        default: return "qdo-es";
    }
}

RunResult run_method(const Task& task, Method method, const SelectionConfig& cfg,
                     const PruneSpec& prune, std::uint64_t seed, const std::string& config_id) {
    const Task pruned = prune_task(task, prune);
    const PredictionSet& val = pruned.validation;
    const std::size_t m = val.n_models();

    RunResult out;
    out.task_name = task.name;
    out.method = method_name(method);
    out.config_id = config_id.empty() ? out.method : config_id;
    out.seed = seed;
    out.prune = prune;
    out.config = cfg;
    out.config.seed = seed;
    out.model_ids = val.model_ids;

    const auto start = std::chrono::steady_clock::now();
    SelectionResult sel;
    switch (method) {
        case Method::single_best: {
            sel.repetitions = RepetitionVector::one_hot(m, single_best_index(val));
            sel.weights = weights_from_repetitions(sel.repetitions);
            sel.validation_loss = ensemble_loss(val, sel.repetitions, task.metric);
            sel.eval_count = 0;
            break;
        }
        case Method::ges_h:
        case Method::ges_f:
            sel = ges_select(val, task.metric, 50,
                             method == Method::ges_h ? GesVariant::with_history
                                                     : GesVariant::final_iterate,
                             seed);
            break;
        case Method::qo_es:
        case Method::qdo_es: {
            out.config.method =
                method == Method::qo_es ? SelectionMethod::qo : SelectionMethod::qdo;
            const ConfigSpaceInfo ranges = ConfigSpaceInfo::from_pool(val);
            sel = qdoes_select(val, task.metric, out.config, 50 * m, ranges);
            break;
        }
    }
    const auto stop = std::chrono::steady_clock::now();

    out.weights = sel.weights.weights;
    out.validation_score = 1.0 - sel.validation_loss;
    if (pruned.test.has_labels()) {
        out.test_score = task.metric.score(
            ensemble_probabilities(pruned.test, sel.repetitions), pruned.test.labels);
    }
    out.eval_count = sel.eval_count;
    out.wall_time_s = std::chrono::duration<double>(stop - start).count();
    out.ensemble_size = sel.repetitions.support_size();
    return out;
}

std::vector<CellOutcome> run_grid(const std::vector<Task>& tasks,
                                  const std::vector<GridEntry>& entries, int jobs) {
    std::vector<CellOutcome> cells(tasks.size() * entries.size());
    std::atomic<std::size_t> cursor{0};

    auto work = [&] {
        for (;;) {
            const std::size_t at = cursor.fetch_add(1);
            if (at >= cells.size()) return;
            const Task& task = tasks[at / entries.size()];
            const GridEntry& entry = entries[at % entries.size()];
            CellOutcome& cell = cells[at];
            cell.task_name = task.name;
            cell.entry_id = entry.id;
            try {
                cell.result =
                    run_method(task, entry.method, entry.config, entry.prune, entry.seed, entry.id);
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
        }
    };

    if (jobs <= 1) {
        work();
    } else {
        std::vector<std::thread> workers;
        for (int j = 0; j < jobs; ++j) workers.emplace_back(work);
        for (std::thread& w : workers) w.join();
    }
    return cells;
}

}  // namespace ensel
