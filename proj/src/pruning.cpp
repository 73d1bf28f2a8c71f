#include "ensel/pruning.hpp"

#include <algorithm>
#include <map>

namespace ensel {

PruneSpec PruneSpec::parse(const std::string& strategy, int n) {
    if (n < 1) throw Error("prune size must be at least 1");
    if (strategy == "top_n") return {Strategy::top_n, n};
    if (strategy == "silo_top_n") return {Strategy::silo_top_n, n};
    throw Error("unknown prune strategy '" + strategy + "' (expected top_n or silo_top_n)");
}

std::string PruneSpec::strategy_name() const {
    return strategy == Strategy::top_n ? "top_n" : "silo_top_n";
}

std::vector<std::size_t> prune_top_n_indices(const PredictionSet& pred, int n) {
    if (n < 1) throw Error("prune_top_n: n must be at least 1");
    std::vector<std::size_t> order(pred.n_models());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return pred.val_scores[a] > pred.val_scores[b];
    });
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(n), order.size());
    order.resize(keep);
    std::sort(order.begin(), order.end());
    return order;
}

std::vector<std::size_t> prune_silo_top_n_indices(const PredictionSet& pred, int n) {
    if (n < 1) throw Error("prune_silo_top_n: n must be at least 1");

    // Family -> members sorted by descending score (stable: ties keep input order).
    std::vector<std::string> family_order;
    std::map<std::string, std::vector<std::size_t>> families;
    for (std::size_t i = 0; i < pred.n_models(); ++i) {
        auto [it, inserted] = families.try_emplace(pred.algorithms[i]);
        if (inserted) family_order.push_back(pred.algorithms[i]);
        it->second.push_back(i);
    }
    for (auto& [name, members] : families) {
        std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
            return pred.val_scores[a] > pred.val_scores[b];
        });
    }
    // Families by their best member's score; ties keep first-appearance order.
    std::stable_sort(family_order.begin(), family_order.end(),
                     [&](const std::string& a, const std::string& b) {
                         return pred.val_scores[families[a].front()] >
                                pred.val_scores[families[b].front()];
                     });

    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(n), pred.n_models());
    std::vector<std::size_t> selected;
    for (std::size_t round = 0; selected.size() < keep; ++round) {
        for (const std::string& name : family_order) {
            const auto& members = families[name];
            if (round >= members.size()) continue;
            selected.push_back(members[round]);
            if (selected.size() == keep) break;
        }
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

std::vector<std::size_t> prune_indices(const PredictionSet& pred, const PruneSpec& spec) {
    return spec.strategy == PruneSpec::Strategy::top_n ? prune_top_n_indices(pred, spec.n)
                                                       : prune_silo_top_n_indices(pred, spec.n);
}

PredictionSet prune_top_n(const PredictionSet& pred, int n) {
    return pred.subset(prune_top_n_indices(pred, n));
}

PredictionSet prune_silo_top_n(const PredictionSet& pred, int n) {
    return pred.subset(prune_silo_top_n_indices(pred, n));
}

}  // namespace ensel
