#include "ensel/metrics.hpp"

#include <algorithm>
#include <numeric>

namespace ensel {

Metric Metric::parse(const std::string& name) {
    if (name == "roc_auc") return {MetricKind::roc_auc};
    if (name == "balanced_accuracy") return {MetricKind::balanced_accuracy};
    throw Error("unknown metric '" + name + "' (expected roc_auc or balanced_accuracy)");
}

std::string Metric::name() const {
    return kind == MetricKind::roc_auc ? "roc_auc" : "balanced_accuracy";
}

double roc_auc_binary(std::span<const double> scores, std::span<const int> labels01) {
    if (scores.size() != labels01.size()) throw Error("roc_auc_binary: length mismatch");
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (int y : labels01) {
        if (y != 0 && y != 1) throw Error("roc_auc_binary: labels must be 0/1");
        n_pos += static_cast<std::size_t>(y);
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw Error("roc_auc_binary: needs both classes present");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Midranks: tied scores share the average of their rank positions.
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t t = i; t < j; ++t) {
            if (labels01[order[t]] == 1) pos_rank_sum += midrank;
        }
        i = j;
    }
    const double np = static_cast<double>(n_pos);
    const double nn = static_cast<double>(n_neg);
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double roc_auc_macro_ovr(const Matrix& probs, const std::vector<int>& labels) {
    if (probs.rows() == 0) throw Error("roc_auc_macro_ovr: empty input");
    if (static_cast<Eigen::Index>(labels.size()) != probs.rows()) {
        throw Error("roc_auc_macro_ovr: label count mismatch");
    }
    const int k = static_cast<int>(probs.cols());
    std::vector<int> class_counts(k, 0);
    for (int y : labels) {
        if (y < 0 || y >= k) throw Error("roc_auc_macro_ovr: label out of range");
        ++class_counts[y];
    }
    int present = 0;
    for (int c : class_counts) present += c > 0 ? 1 : 0;
    if (present < 2) throw Error("roc_auc_macro_ovr: fewer than two classes present");

    std::vector<int> binary(labels.size());
    std::vector<double> column(labels.size());
    auto class_auc = [&](int c) {
        for (std::size_t t = 0; t < labels.size(); ++t) {
            binary[t] = labels[t] == c ? 1 : 0;
            column[t] = probs(static_cast<Eigen::Index>(t), c);
        }
        return roc_auc_binary(column, binary);
    };

    if (k == 2) return class_auc(1);

    double sum = 0.0;
    for (int c = 0; c < k; ++c) {
        if (class_counts[c] == 0) continue;
        sum += class_auc(c);
    }
    return sum / static_cast<double>(present);
}

double balanced_accuracy(const std::vector<int>& predicted, const std::vector<int>& labels) {
    if (labels.empty()) throw Error("balanced_accuracy: empty input");
    if (predicted.size() != labels.size()) throw Error("balanced_accuracy: length mismatch");
    const int k = 1 + *std::max_element(labels.begin(), labels.end());
    std::vector<int> correct(k, 0), count(k, 0);
    for (std::size_t t = 0; t < labels.size(); ++t) {
        if (labels[t] < 0) throw Error("balanced_accuracy: negative label");
        ++count[labels[t]];
        if (predicted[t] == labels[t]) ++correct[labels[t]];
    }
    double sum = 0.0;
    int present = 0;
    for (int c = 0; c < k; ++c) {
        if (count[c] == 0) continue;
        sum += static_cast<double>(correct[c]) / static_cast<double>(count[c]);
        ++present;
    }
    return sum / static_cast<double>(present);
}

double Metric::score(const Matrix& probs, const std::vector<int>& labels) const {
    if (kind == MetricKind::roc_auc) return roc_auc_macro_ovr(probs, labels);
    return balanced_accuracy(predict_labels(probs), labels);
}

double ensemble_loss(const PredictionSet& pred, const RepetitionVector& r, Metric metric) {
    if (!pred.has_labels()) throw Error("ensemble_loss: split has no labels");
    return 1.0 - metric.score(ensemble_probabilities(pred, r), pred.labels);
}

std::vector<std::vector<double>> loss_vectors(const PredictionSet& pred) {
    if (!pred.has_labels()) throw Error("loss_vectors: split has no labels");
    const std::size_t n = pred.labels.size();
    std::vector<std::vector<double>> out(pred.n_models(), std::vector<double>(n));
    for (std::size_t i = 0; i < pred.n_models(); ++i) {
        const Matrix& p = pred.probabilities[i];
        for (std::size_t t = 0; t < n; ++t) {
            out[i][t] = 1.0 - p(static_cast<Eigen::Index>(t), pred.labels[t]);
        }
    }
    return out;
}

}  // namespace ensel
