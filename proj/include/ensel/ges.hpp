#pragma once

#include <cstdint>

#include "ensel/metrics.hpp"

namespace ensel {

// with_history returns the best iterate seen during the run; final_iterate
// returns the ensemble held after the last iteration.
enum class GesVariant { with_history, final_iterate };

// Greedy ensemble selection with replacement. Every iteration evaluates all
// m one-step extensions of the current ensemble and keeps the one with the
// lowest validation loss; ties are broken uniformly at random. Exactly
// iterations * m loss evaluations are performed. If the selected ensemble is
// worse than the best single model on validation, that model's one-hot is
// returned instead.
SelectionResult ges_select(const PredictionSet& pred, Metric metric, int iterations,
                           GesVariant variant, std::uint64_t seed);

}  // namespace ensel
