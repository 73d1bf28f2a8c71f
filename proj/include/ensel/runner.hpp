#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ensel/qdoes.hpp"
#include "ensel/task.hpp"

namespace ensel {

enum class Method { single_best, ges_h, ges_f, qo_es, qdo_es };

Method parse_method(const std::string& name);
std::string method_name(Method m);

struct RunResult {
    std::string task_name;
    std::string method;
    std::string config_id;
    std::uint64_t seed = 0;
    PruneSpec prune;
    SelectionConfig config;  // resolved configuration, meaningful for qo-es/qdo-es
    std::vector<std::string> model_ids;  // pruned pool, aligned with weights
    std::vector<double> weights;
    double validation_score = 0.0;
    std::optional<double> test_score;
    std::size_t eval_count = 0;
    double wall_time_s = 0.0;
    int ensemble_size = 0;
};

// Prunes the pool, runs the selector with a budget of 50 evaluations per
// pooled model (GES: 50 iterations), and scores the returned ensemble on both
// splits. single_best spends no evaluations and returns the one-hot of the
// highest val_score model.
RunResult run_method(const Task& task, Method method, const SelectionConfig& cfg,
                     const PruneSpec& prune, std::uint64_t seed, const std::string& config_id = "");

struct GridEntry {
    std::string id;
    Method method = Method::single_best;
    SelectionConfig config;
    PruneSpec prune;
    std::uint64_t seed = 0;
};

struct CellOutcome {
    std::string task_name;
    std::string entry_id;
    std::optional<RunResult> result;
    std::string error;  // set when the run failed
};

// Runs every (task, entry) cell. jobs > 1 dispatches cells to worker threads;
// each cell is computed exactly as in a sequential run, so results do not
// depend on jobs. Outcomes are ordered task-major.
std::vector<CellOutcome> run_grid(const std::vector<Task>& tasks,
                                  const std::vector<GridEntry>& entries, int jobs);

}  // namespace ensel
