#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace ensel {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Matrix = Eigen::MatrixXd;

// Hyperparameter value: numeric or categorical.
using ConfigValue = std::variant<double, std::string>;
using ConfigMap = std::map<std::string, ConfigValue>;

// Ensemble encoding: counts[i] is how often base model i was selected.
// The induced weight of model i is counts[i] / sum(counts).
struct RepetitionVector {
    std::vector<int> counts;

    static RepetitionVector zeros(std::size_t m) { return {std::vector<int>(m, 0)}; }
    static RepetitionVector one_hot(std::size_t m, std::size_t i) {
        RepetitionVector r = zeros(m);
        r.counts.at(i) = 1;
        return r;
    }

    std::size_t size() const { return counts.size(); }
    long total() const {
        long t = 0;
        for (int c : counts) t += c;
        return t;
    }
    int support_size() const {
        int s = 0;
        for (int c : counts) s += c > 0 ? 1 : 0;
        return s;
    }
    bool empty() const { return total() == 0; }
    std::vector<std::size_t> support() const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < counts.size(); ++i)
            if (counts[i] > 0) idx.push_back(i);
        return idx;
    }

    bool operator==(const RepetitionVector&) const = default;
};

struct RepetitionVectorHash {
    std::size_t operator()(const RepetitionVector& r) const {
        std::size_t h = 1469598103934665603ull;
        for (int c : r.counts) {
            h ^= static_cast<std::size_t>(c) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        return h;
    }
};

struct WeightVector {
    std::vector<double> weights;
    bool operator==(const WeightVector&) const = default;
};

// Predictions of a model pool on one data split, together with per-model
// metadata. Labels may be absent (unlabelled test split).
struct PredictionSet {
    std::vector<std::string> model_ids;
    std::vector<std::string> algorithms;
    std::vector<ConfigMap> configs;
    std::vector<double> val_scores;
    std::vector<Matrix> probabilities;  // one n_instances x n_classes matrix per model
    std::vector<int> labels;            // empty when the split is unlabelled

    std::size_t n_models() const { return model_ids.size(); }
    Eigen::Index n_instances() const { return probabilities.empty() ? 0 : probabilities.front().rows(); }
    int n_classes() const {
        return probabilities.empty() ? 0 : static_cast<int>(probabilities.front().cols());
    }
    bool has_labels() const { return !labels.empty(); }

    // Checks the structural invariants and renormalises every probability row.
    // Rows whose sum is farther than 1e-6 from 1 are rejected. `origin` is used
    // in error messages to point at the offending input.
    static PredictionSet validated(PredictionSet raw, const std::string& origin = "prediction set");

    PredictionSet subset(const std::vector<std::size_t>& keep) const;
};

// counts -> normalised weights. Errors on the all-zero vector.
WeightVector weights_from_repetitions(const RepetitionVector& r);

// Weighted mean of the member probability matrices. Only models with a
// non-zero weight are read.
Matrix ensemble_probabilities(const PredictionSet& pred, const RepetitionVector& r);

// Row-wise argmax; ties resolve to the lowest class index.
std::vector<int> predict_labels(const Matrix& probs);

// Index of the model with the highest val_score; ties resolve to the lowest index.
std::size_t single_best_index(const PredictionSet& pred);

}  // namespace ensel
