#include "ensel/ges.hpp"

#include "ensel/random.hpp"

namespace ensel {

SelectionResult ges_select(const PredictionSet& pred, Metric metric, int iterations,
                           GesVariant variant, std::uint64_t seed) {
    if (iterations < 1) throw Error("ges_select: iterations must be at least 1");
    const std::size_t m = pred.n_models();
    Rng rng(seed);
    LossEvaluator eval(pred, metric);

    RepetitionVector current = RepetitionVector::zeros(m);
    std::vector<std::pair<RepetitionVector, double>> history;
    std::vector<double> trajectory;
    history.reserve(iterations);

    std::vector<std::size_t> tied;
    for (int it = 0; it < iterations; ++it) {
        double best_loss = 0.0;
        tied.clear();
        for (std::size_t i = 0; i < m; ++i) {
            RepetitionVector candidate = current;
            ++candidate.counts[i];
            const double l = eval.loss(candidate);
            if (tied.empty() || l < best_loss) {
                best_loss = l;
                tied.assign(1, i);
            } else if (l == best_loss) {
                tied.push_back(i);
            }
        }
        ++current.counts[tied[rng.index(tied.size())]];
        history.emplace_back(current, best_loss);
        trajectory.push_back(best_loss);
    }

    RepetitionVector chosen;
    double chosen_loss;
    if (variant == GesVariant::with_history) {
        double best = history.front().second;
        for (const auto& [r, l] : history) best = std::min(best, l);
        tied.clear();
        for (std::size_t h = 0; h < history.size(); ++h) {
            if (history[h].second == best) tied.push_back(h);
        }
        const auto& pick = history[tied[rng.index(tied.size())]];
        chosen = pick.first;
        chosen_loss = pick.second;
    } else {
        chosen = history.back().first;
        chosen_loss = history.back().second;
    }

    const RepetitionVector sb = RepetitionVector::one_hot(m, single_best_index(pred));
    const double sb_loss = eval.loss_uncounted(sb);
    if (chosen_loss > sb_loss) {
        chosen = sb;
        chosen_loss = sb_loss;
    }

    SelectionResult res;
    res.repetitions = chosen;
    res.weights = weights_from_repetitions(chosen);
    res.validation_loss = chosen_loss;
    res.eval_count = eval.count();
    res.trajectory = std::move(trajectory);
    return res;
}

}  // namespace ensel
