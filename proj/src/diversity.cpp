#include "ensel/diversity.hpp"

#include <algorithm>
#include <cmath>

namespace ensel {

namespace {

double clamp(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

bool constant(const std::vector<double>& v) {
    for (double x : v)
        if (x != v.front()) return false;
    return true;
}

// alc and css share the support-pair averaging; keep the iteration order in
// one place so cached and direct computation agree bit for bit.
template <class PairTerm>
double mean_over_pairs(const std::vector<std::size_t>& support, PairTerm term) {
    const std::size_t s = support.size();
    double sum = 0.0;
    for (std::size_t a = 0; a < s; ++a) {
        for (std::size_t b = a + 1; b < s; ++b) {
            sum += term(support[a], support[b]);
        }
    }
    return sum / (0.5 * static_cast<double>(s) * static_cast<double>(s - 1));
}

}  // namespace

ConfigSpaceInfo ConfigSpaceInfo::from_pool(const PredictionSet& pred) {
    ConfigSpaceInfo info;
    std::map<std::string, std::pair<double, double>> spans;
    for (std::size_t i = 0; i < pred.n_models(); ++i) {
        for (const auto& [key, value] : effective_config(pred, i)) {
            if (!std::holds_alternative<double>(value)) continue;
            const double v = std::get<double>(value);
            auto it = spans.find(key);
            if (it == spans.end()) {
                spans.emplace(key, std::pair{v, v});
            } else {
                it->second.first = std::min(it->second.first, v);
                it->second.second = std::max(it->second.second, v);
            }
        }
    }
    for (const auto& [key, span] : spans) {
        info.numeric_ranges[key] = span.second - span.first;
    }
    return info;
}

ConfigMap effective_config(const PredictionSet& pred, std::size_t i) {
    ConfigMap c = pred.configs.at(i);
    c["algorithm"] = pred.algorithms.at(i);
    return c;
}

double gower_similarity(const ConfigMap& a, const ConfigMap& b, const ConfigSpaceInfo& info) {
    double sum = 0.0;
    std::size_t shared = 0;
    for (const auto& [key, va] : a) {
        auto it = b.find(key);
        if (it == b.end()) continue;
        const ConfigValue& vb = it->second;
        ++shared;
        if (std::holds_alternative<double>(va) && std::holds_alternative<double>(vb)) {
            auto range = info.numeric_ranges.find(key);
            const double r = range == info.numeric_ranges.end() ? 0.0 : range->second;
            if (r == 0.0) {
                sum += 1.0;
            } else {
                sum += clamp(1.0 - std::abs(std::get<double>(va) - std::get<double>(vb)) / r, 0.0, 1.0);
            }
        } else {
            sum += va == vb ? 1.0 : 0.0;
        }
    }
    if (shared == 0) throw Error("gower_similarity: configs share no hyperparameters");
    return sum / static_cast<double>(shared);
}

double loss_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) throw Error("loss_correlation: length mismatch");
    if (constant(a) || constant(b)) return a == b ? 1.0 : 0.0;
    const double n = static_cast<double>(a.size());
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        mean_a += a[t];
        mean_b += b[t];
    }
    mean_a /= n;
    mean_b /= n;
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        const double da = a[t] - mean_a;
        const double db = b[t] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0) return a == b ? 1.0 : 0.0;
    return clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

double alc(const PredictionSet& pred, const RepetitionVector& r) {
    if (r.size() != pred.n_models()) throw Error("alc: repetition vector length mismatch");
    const std::vector<std::size_t> support = r.support();
    if (support.empty()) throw Error("alc: empty ensemble");
    if (support.size() == 1) return 1.0;
    const auto losses = loss_vectors(pred);
    return mean_over_pairs(support, [&](std::size_t i, std::size_t j) {
        return loss_correlation(losses[i], losses[j]);
    });
}

double css(const PredictionSet& pred, const RepetitionVector& r, const ConfigSpaceInfo& info) {
    if (r.size() != pred.n_models()) throw Error("css: repetition vector length mismatch");
    const std::vector<std::size_t> support = r.support();
    if (support.empty()) throw Error("css: empty ensemble");
    if (support.size() == 1) return 0.0;
    return mean_over_pairs(support, [&](std::size_t i, std::size_t j) {
        return 1.0 - gower_similarity(effective_config(pred, i), effective_config(pred, j), info);
    });
}

BehaviorDescriptor behavior(const PredictionSet& pred, const RepetitionVector& r,
                            const ConfigSpaceInfo& info) {
    BehaviorDescriptor d;
    d.alc = clamp(alc(pred, r), -1.0, 1.0);
    d.css = clamp(css(pred, r, info), 0.0, 1.0);
    return d;
}

DiversityCache::DiversityCache(const PredictionSet& pred, const ConfigSpaceInfo& info) {
    const std::size_t m = pred.n_models();
    const auto losses = loss_vectors(pred);
    rho_ = Matrix::Ones(m, m);
    gower_dis_ = Matrix::Zero(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            rho_(i, j) = rho_(j, i) = loss_correlation(losses[i], losses[j]);
            const double dis =
                1.0 - gower_similarity(effective_config(pred, i), effective_config(pred, j), info);
            gower_dis_(i, j) = gower_dis_(j, i) = dis;
        }
    }
}

BehaviorDescriptor DiversityCache::behavior(const RepetitionVector& r) const {
    const std::vector<std::size_t> support = r.support();
    if (support.empty()) throw Error("behavior: empty ensemble");
    if (support.size() == 1) return {1.0, 0.0};
    BehaviorDescriptor d;
    d.alc = clamp(mean_over_pairs(support, [&](std::size_t i, std::size_t j) { return rho_(i, j); }),
                  -1.0, 1.0);
    d.css = clamp(
        mean_over_pairs(support, [&](std::size_t i, std::size_t j) { return gower_dis_(i, j); }),
        0.0, 1.0);
    return d;
}

}  // namespace ensel
