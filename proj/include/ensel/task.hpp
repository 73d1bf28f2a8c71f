#pragma once

#include <filesystem>
#include <string>

#include "ensel/core.hpp"
#include "ensel/metrics.hpp"
#include "ensel/pruning.hpp"

namespace ensel {

// A benchmark task: one model pool with predictions on a labelled validation
// split and a test split whose labels may be missing.
struct Task {
    std::string name;
    int n_classes = 0;
    Metric metric;
    PredictionSet validation;
    PredictionSet test;
};

// On-disk layout:
//   dir/task.json                 pool metadata (ids, algorithms, configs, val scores)
//   dir/val/labels.csv            one integer label per line
//   dir/val/pred_<model_id>.csv   probability rows, header c0,...,c{K-1}
//   dir/test/...                  same layout, labels.csv optional
Task load_task(const std::filesystem::path& dir);
void save_task(const Task& task, const std::filesystem::path& dir);

// Applies the prune selection to both splits so they stay aligned.
Task prune_task(const Task& task, const PruneSpec& spec);

// Decimal text with 9 significant digits; the writers use this for every
// floating point value.
std::string format_g9(double v);
// Nearest double to the 9-significant-digit decimal form of v.
double quantize9(double v);

}  // namespace ensel
