#pragma once

#include <string>
#include <vector>

#include "ensel/core.hpp"

namespace ensel {

struct PruneSpec {
    enum class Strategy { top_n, silo_top_n };

    Strategy strategy = Strategy::top_n;
    int n = 50;

    static PruneSpec parse(const std::string& strategy, int n);
    std::string strategy_name() const;
};

// Indices of the min(n, m) models with the highest val_score; ties keep the
// earlier-listed model. The returned indices preserve the input order.
std::vector<std::size_t> prune_top_n_indices(const PredictionSet& pred, int n);

// Round-robin over algorithm families, families ordered by their best
// val_score, models within a family by descending val_score. Exhausted
// families are skipped until min(n, m) models are collected.
std::vector<std::size_t> prune_silo_top_n_indices(const PredictionSet& pred, int n);

std::vector<std::size_t> prune_indices(const PredictionSet& pred, const PruneSpec& spec);

PredictionSet prune_top_n(const PredictionSet& pred, int n);
PredictionSet prune_silo_top_n(const PredictionSet& pred, int n);

}  // namespace ensel
