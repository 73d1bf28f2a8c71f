#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "ensel/core.hpp"
#include "ensel/random.hpp"

namespace testutil {

inline ensel::Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = static_cast<Eigen::Index>(rows.begin()->size());
    ensel::Matrix m(r, c);
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        Eigen::Index j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

// Binary prediction matrix from per-instance true-class probabilities: the
// row of an instance with label y gets probability p on column y.
inline ensel::Matrix binary_from_true_prob(const std::vector<double>& true_prob,
                                           const std::vector<int>& labels) {
    ensel::Matrix m(static_cast<Eigen::Index>(true_prob.size()), 2);
    for (std::size_t i = 0; i < true_prob.size(); ++i) {
        m(i, labels[i]) = true_prob[i];
        m(i, 1 - labels[i]) = 1.0 - true_prob[i];
    }
    return m;
}

inline ensel::PredictionSet pool(std::vector<ensel::Matrix> probs, std::vector<int> labels,
                                 std::vector<double> val_scores = {},
                                 std::vector<std::string> algorithms = {}) {
    ensel::PredictionSet p;
    const std::size_t m = probs.size();
    for (std::size_t i = 0; i < m; ++i) p.model_ids.push_back("m" + std::to_string(i));
    p.algorithms = algorithms.empty() ? std::vector<std::string>(m, "alg") : std::move(algorithms);
    p.configs.resize(m);
    p.val_scores = val_scores.empty() ? std::vector<double>(m, 0.5) : std::move(val_scores);
    p.probabilities = std::move(probs);
    p.labels = std::move(labels);
    return ensel::PredictionSet::validated(std::move(p), "test pool");
}

// Random labelled pool; every class is present in the labels.
inline ensel::PredictionSet random_pool(ensel::Rng& rng, int m, int n, int k,
                                        std::vector<std::string> algorithms = {}) {
    std::vector<ensel::Matrix> probs;
    for (int i = 0; i < m; ++i) {
        ensel::Matrix p(n, k);
        for (int t = 0; t < n; ++t) {
            double sum = 0.0;
            for (int c = 0; c < k; ++c) {
                p(t, c) = 0.05 + rng.uniform();
                sum += p(t, c);
            }
            for (int c = 0; c < k; ++c) p(t, c) /= sum;
        }
        probs.push_back(std::move(p));
    }
    std::vector<int> labels(n);
    for (int t = 0; t < n; ++t) labels[t] = t < k ? t : static_cast<int>(rng.index(k));
    std::vector<double> scores(m);
    for (int i = 0; i < m; ++i) scores[i] = rng.uniform();
    return pool(std::move(probs), std::move(labels), std::move(scores), std::move(algorithms));
}

inline ensel::RepetitionVector reps(std::initializer_list<int> counts) {
    return ensel::RepetitionVector{std::vector<int>(counts)};
}

}  // namespace testutil
