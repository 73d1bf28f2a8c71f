#pragma once

#include <map>
#include <string>
#include <vector>

#include "ensel/core.hpp"
#include "ensel/metrics.hpp"

namespace ensel {

// Behaviour-space coordinates of an ensemble: average loss correlation of its
// members and average config-space similarity distance between them.
struct BehaviorDescriptor {
    double alc = 0.0;
    double css = 0.0;
    bool operator==(const BehaviorDescriptor&) const = default;
};

// Observed min-max spans of the numeric hyperparameters of a model pool,
// keyed by hyperparameter name. Computed once per (pruned) pool and reused
// for every Gower evaluation so that similarity values are comparable.
struct ConfigSpaceInfo {
    std::map<std::string, double> numeric_ranges;

    static ConfigSpaceInfo from_pool(const PredictionSet& pred);
};

// Model config plus the implicit "algorithm" hyperparameter, which is the one
// key every pair of models shares.
ConfigMap effective_config(const PredictionSet& pred, std::size_t i);

// Gower similarity over the hyperparameters both configs define: equality
// indicator for categorical values, 1 - |a-b|/range for numeric ones (a zero
// range counts as 1). Mean over the shared keys; errors when none are shared.
double gower_similarity(const ConfigMap& a, const ConfigMap& b, const ConfigSpaceInfo& info);

// Pearson correlation with a convention for degenerate inputs: if either
// vector is constant the result is 1 for identical vectors and 0 otherwise.
// Clamped to [-1, 1].
double loss_correlation(const std::vector<double>& a, const std::vector<double>& b);

// Mean pairwise loss correlation over the ensemble support; 1.0 for a
// single-model ensemble.
double alc(const PredictionSet& pred, const RepetitionVector& r);

// Mean pairwise (1 - Gower similarity) over the ensemble support; 0.0 for a
// single-model ensemble.
double css(const PredictionSet& pred, const RepetitionVector& r, const ConfigSpaceInfo& info);

// (alc, css), clamped to [-1,1] x [0,1] against round-off.
BehaviorDescriptor behavior(const PredictionSet& pred, const RepetitionVector& r,
                            const ConfigSpaceInfo& info);

// Precomputed pairwise statistics for one pool. behavior() through the cache
// is identical to the direct functions; selectors use it to avoid recomputing
// pairwise terms for every evaluated ensemble.
class DiversityCache {
public:
    DiversityCache(const PredictionSet& pred, const ConfigSpaceInfo& info);

    BehaviorDescriptor behavior(const RepetitionVector& r) const;

private:
    Matrix rho_;        // pairwise loss correlations
    Matrix gower_dis_;  // pairwise 1 - Gower similarity
};

}  // namespace ensel
