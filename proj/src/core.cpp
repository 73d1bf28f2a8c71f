#include "ensel/core.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace ensel {

PredictionSet PredictionSet::validated(PredictionSet raw, const std::string& origin) {
    const std::size_t m = raw.model_ids.size();
    if (m == 0) throw Error(origin + ": model pool is empty");
    if (raw.algorithms.size() != m || raw.configs.size() != m || raw.val_scores.size() != m ||
        raw.probabilities.size() != m) {
        throw Error(origin + ": per-model fields have inconsistent lengths");
    }
    {
        std::set<std::string> ids(raw.model_ids.begin(), raw.model_ids.end());
        if (ids.size() != m) throw Error(origin + ": duplicate model ids");
    }

    const Eigen::Index n = raw.probabilities.front().rows();
    const Eigen::Index k = raw.probabilities.front().cols();
    if (n == 0 || k < 2) {
        throw Error(origin + ": probability matrices must be non-empty with at least 2 classes");
    }
    for (std::size_t i = 0; i < m; ++i) {
        Matrix& p = raw.probabilities[i];
        if (p.rows() != n || p.cols() != k) {
            throw Error(origin + ": model " + raw.model_ids[i] + " has mismatched matrix shape");
        }
        for (Eigen::Index row = 0; row < n; ++row) {
            double sum = 0.0;
            for (Eigen::Index col = 0; col < k; ++col) {
                const double v = p(row, col);
                if (!(v >= 0.0) || !std::isfinite(v)) {
                    std::ostringstream msg;
                    msg << origin << ": model " << raw.model_ids[i] << " row " << row
                        << " has an invalid probability";
                    throw Error(msg.str());
                }
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-6) {
                std::ostringstream msg;
                msg << origin << ": model " << raw.model_ids[i] << " row " << row
                    << " sums to " << sum << ", outside the 1e-6 tolerance";
                throw Error(msg.str());
            }
            p.row(row) /= sum;
        }
    }

    if (!raw.labels.empty()) {
        if (static_cast<Eigen::Index>(raw.labels.size()) != n) {
            throw Error(origin + ": label count does not match the number of instances");
        }
        for (std::size_t t = 0; t < raw.labels.size(); ++t) {
            if (raw.labels[t] < 0 || raw.labels[t] >= static_cast<int>(k)) {
                std::ostringstream msg;
                msg << origin << ": label " << raw.labels[t] << " at row " << t
                    << " is outside [0, " << k << ")";
                throw Error(msg.str());
            }
        }
    }
    return raw;
}

PredictionSet PredictionSet::subset(const std::vector<std::size_t>& keep) const {
    PredictionSet out;
    out.labels = labels;
    for (std::size_t i : keep) {
        out.model_ids.push_back(model_ids.at(i));
        out.algorithms.push_back(algorithms.at(i));
        out.configs.push_back(configs.at(i));
        out.val_scores.push_back(val_scores.at(i));
        out.probabilities.push_back(probabilities.at(i));
    }
    return out;
}

WeightVector weights_from_repetitions(const RepetitionVector& r) {
    const long total = r.total();
    if (total <= 0) throw Error("empty ensemble: repetition vector has no selections");
    WeightVector w;
    w.weights.resize(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r.counts[i] < 0) throw Error("negative repetition count");
        w.weights[i] = static_cast<double>(r.counts[i]) / static_cast<double>(total);
    }
    return w;
}

Matrix ensemble_probabilities(const PredictionSet& pred, const RepetitionVector& r) {
    if (r.size() != pred.n_models()) {
        throw Error("repetition vector length does not match the model pool");
    }
    const WeightVector w = weights_from_repetitions(r);
    Matrix out = Matrix::Zero(pred.n_instances(), pred.n_classes());
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r.counts[i] > 0) out += w.weights[i] * pred.probabilities[i];
    }
    return out;
}

std::vector<int> predict_labels(const Matrix& probs) {
    if (probs.rows() == 0 || probs.cols() == 0) throw Error("predict_labels: empty matrix");
    std::vector<int> labels(probs.rows());
    for (Eigen::Index row = 0; row < probs.rows(); ++row) {
        int best = 0;
        for (Eigen::Index col = 1; col < probs.cols(); ++col) {
            if (probs(row, col) > probs(row, best)) best = static_cast<int>(col);
        }
        labels[row] = best;
    }
    return labels;
}

std::size_t single_best_index(const PredictionSet& pred) {
    if (pred.n_models() == 0) throw Error("empty model pool");
    std::size_t best = 0;
    for (std::size_t i = 1; i < pred.n_models(); ++i) {
        if (pred.val_scores[i] > pred.val_scores[best]) best = i;
    }
    return best;
}

}  // namespace ensel
