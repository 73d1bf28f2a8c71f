#include "ensel/report.hpp"

#include <algorithm>
#include <cmath>

namespace ensel {

namespace {

constexpr double kTolerance = 1e-4;

double median(std::vector<double> v) {
    if (v.empty()) throw Error("median of an empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    if (v.size() % 2 == 1) return v[mid];
    return 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

void ScoreTable::validate() const {
    if (datasets.empty() || configs.empty()) throw Error("score table is empty");
    if (scores.size() != datasets.size() || baseline.size() != datasets.size()) {
        throw Error("score table row count mismatch");
    }
    for (const auto& row : scores) {
        if (row.size() != configs.size()) throw Error("score table is not rectangular");
    }
}

double normalized_improvement_value(double s, double s_b, double s_star) {
    if (std::abs(s_star - s_b) <= kTolerance) {
        if (std::abs(s - s_b) <= kTolerance) return -1.0;
        if (s < s_b) return -10.0;
    }
    return (s - s_b) / (s_star - s_b) - 1.0;
}

std::vector<std::vector<double>> normalized_improvement(const ScoreTable& table) {
    table.validate();
    std::vector<std::vector<double>> out(table.datasets.size());
    for (std::size_t d = 0; d < table.datasets.size(); ++d) {
        const double s_b = table.baseline[d];
        double s_star = s_b;
        for (double s : table.scores[d]) s_star = std::max(s_star, s);
        out[d].reserve(table.configs.size());
        for (double s : table.scores[d]) {
            out[d].push_back(normalized_improvement_value(s, s_b, s_star));
        }
    }
    return out;
}

std::vector<double> mean_ranks(const ScoreTable& table) {
    table.validate();
    const std::size_t c = table.configs.size();
    std::vector<double> sums(c, 0.0);
    std::vector<std::size_t> order(c);
    for (const auto& row : table.scores) {
        for (std::size_t i = 0; i < c; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
        std::size_t i = 0;
        while (i < c) {
            std::size_t j = i;
            while (j < c && row[order[j]] == row[order[i]]) ++j;
            const double shared = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
            for (std::size_t t = i; t < j; ++t) sums[order[t]] += shared;
            i = j;
        }
    }
    for (double& s : sums) s /= static_cast<double>(table.datasets.size());
    return sums;
}

std::vector<std::string> loo_cv_select(const ScoreTable& table) {
    table.validate();
    if (table.datasets.size() < 2) {
        throw Error("loo_cv_select needs at least two datasets");
    }
    const std::vector<std::vector<double>> ni = normalized_improvement(table);
    std::vector<std::string> chosen(table.datasets.size());
    for (std::size_t held = 0; held < table.datasets.size(); ++held) {
        std::size_t best = 0;
        double best_median = 0.0;
        bool first = true;
        for (std::size_t c = 0; c < table.configs.size(); ++c) {
            std::vector<double> column;
            for (std::size_t d = 0; d < table.datasets.size(); ++d) {
                if (d != held) column.push_back(ni[d][c]);
            }
            const double m = median(std::move(column));
            if (first || m > best_median ||
                (m == best_median && table.configs[c] < table.configs[best])) {
                best = c;
                best_median = m;
                first = false;
            }
        }
        chosen[held] = table.configs[best];
    }
    return chosen;
}

}  // namespace ensel
