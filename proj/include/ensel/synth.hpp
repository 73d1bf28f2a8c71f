#pragma once

#include <cstdint>
#include <string>

#include "ensel/task.hpp"

namespace ensel {

// Knobs of the synthetic task generator. Each model's chance of predicting
// the true class is drawn from [accuracy_lo, accuracy_hi]; correlation in
// [0, 1] mixes in a shared error source so model mistakes co-occur (1 makes
// every model's error indicator identical). Validation and test splits are
// generated with n_instances each.
struct SynthSpec {
    int n_models = 10;
    int n_instances = 200;
    int n_classes = 2;
    double accuracy_lo = 0.6;
    double accuracy_hi = 0.8;
    double correlation = 0.5;
    MetricKind metric = MetricKind::roc_auc;
    std::uint64_t seed = 0;
    std::string name;  // defaults to synth-<seed>
};

// Deterministic in the spec (same spec -> identical bundle). Emits at least
// two synthetic algorithm families; every model has two numeric and one
// categorical hyperparameter, and val_score holds the model's own validation
// score under the task metric.
Task synth_task(const SynthSpec& spec);

}  // namespace ensel
