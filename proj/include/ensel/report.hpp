#pragma once

#include <string>
#include <vector>

#include "ensel/core.hpp"

namespace ensel {

// Rectangular score matrix (higher is better) of configurations over
// datasets, plus the single-best baseline score per dataset.
struct ScoreTable {
    std::vector<std::string> datasets;
    std::vector<std::string> configs;
    std::vector<std::vector<double>> scores;  // [dataset][config]
    std::vector<double> baseline;

    void validate() const;
};

// Score s rescaled against the dataset's baseline s_b and best-observed
// score s_star: 0 means matching the best, -1 matching the baseline. When
// s_star and s_b are closer than the tolerance, cells within tolerance of
// the baseline map to -1, worse cells to -10, and better cells fall back to
// the main formula.
double normalized_improvement_value(double s, double s_b, double s_star);

// Per-cell normalised improvement; s_star per dataset is the maximum over
// the row's cells and the baseline.
std::vector<std::vector<double>> normalized_improvement(const ScoreTable& table);

// Mean rank per configuration column; rank 1 is the best score in a dataset
// row, ties share the average rank.
std::vector<double> mean_ranks(const ScoreTable& table);

// Leave-one-out selection over the configs of one method: for each held-out
// dataset, the config with the highest median normalised improvement over
// the remaining datasets (ties: lexicographically smallest id). Needs at
// least two datasets.
std::vector<std::string> loo_cv_select(const ScoreTable& table);

}  // namespace ensel
