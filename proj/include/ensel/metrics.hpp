#pragma once

#include <span>
#include <string>
#include <vector>

#include "ensel/core.hpp"

namespace ensel {

enum class MetricKind { roc_auc, balanced_accuracy };

struct Metric {
    MetricKind kind = MetricKind::roc_auc;

    static Metric parse(const std::string& name);
    std::string name() const;

    // Score in [0, 1], higher is better. roc_auc needs probabilities and uses
    // macro one-vs-rest averaging for more than two classes; balanced_accuracy
    // scores the argmax labels.
    double score(const Matrix& probs, const std::vector<int>& labels) const;
};

// Mann-Whitney formulation with midranks, so tied score pairs count 1/2.
// labels01 holds 0/1; errors unless both classes are present.
double roc_auc_binary(std::span<const double> scores, std::span<const int> labels01);

// Unweighted mean of one-vs-rest AUCs over the classes present in labels.
// Classes without instances are skipped; fewer than two present classes is an
// error. Two-column input reduces to the binary AUC of column 1.
double roc_auc_macro_ovr(const Matrix& probs, const std::vector<int>& labels);

// Mean per-class recall over the classes present in labels.
double balanced_accuracy(const std::vector<int>& predicted, const std::vector<int>& labels);

// 1 - score of the aggregated ensemble prediction.
double ensemble_loss(const PredictionSet& pred, const RepetitionVector& r, Metric metric);

// Per-model instance losses l_i[t] = 1 - p_i(true class of t).
std::vector<std::vector<double>> loss_vectors(const PredictionSet& pred);

// Loss evaluation with an audited call counter. Selectors route every
// search evaluation through loss(); bookkeeping evaluations that are not part
// of the search budget use loss_uncounted().
class LossEvaluator {
public:
    LossEvaluator(const PredictionSet& pred, Metric metric) : pred_(&pred), metric_(metric) {}

    double loss(const RepetitionVector& r) {
        ++count_;
        return ensemble_loss(*pred_, r, metric_);
    }
    double loss_uncounted(const RepetitionVector& r) const {
        return ensemble_loss(*pred_, r, metric_);
    }
    std::size_t count() const { return count_; }
    const PredictionSet& pool() const { return *pred_; }
    Metric metric() const { return metric_; }

private:
    const PredictionSet* pred_;
    Metric metric_;
    std::size_t count_ = 0;
};

// Outcome of one selector run on a task.
struct SelectionResult {
    RepetitionVector repetitions;
    WeightVector weights;
    double validation_loss = 0.0;
    std::size_t eval_count = 0;
    std::vector<double> trajectory;  // best loss per iteration
};

}  // namespace ensel
