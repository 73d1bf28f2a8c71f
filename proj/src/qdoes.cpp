#include "ensel/qdoes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ensel {

namespace {

double clamp(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

}  // namespace

InitStrategy parse_init(const std::string& name) {
    if (name == "l1") return InitStrategy::L1;
    if (name == "l2_single_best") return InitStrategy::L2_single_best;
    if (name == "random_l2") return InitStrategy::random_L2;
    throw Error("unknown init strategy '" + name + "'");
}

SamplingStrategy parse_sampling(const std::string& name) {
    if (name == "deterministic") return SamplingStrategy::deterministic;
    if (name == "tournament") return SamplingStrategy::tournament;
    if (name == "dynamic") return SamplingStrategy::dynamic;
    throw Error("unknown sampling strategy '" + name + "'");
}

CrossoverKind parse_crossover(const std::string& name) {
    if (name == "two_point") return CrossoverKind::two_point;
    if (name == "average") return CrossoverKind::average;
    if (name == "none") return CrossoverKind::none;
    throw Error("unknown crossover kind '" + name + "'");
}

std::string init_name(InitStrategy s) {
    switch (s) {
        case InitStrategy::L1: return "l1";
        case InitStrategy::L2_single_best: return "l2_single_best";
        default: return "random_l2";
    }
}

std::string sampling_name(SamplingStrategy s) {
    switch (s) {
        case SamplingStrategy::deterministic: return "deterministic";
        case SamplingStrategy::tournament: return "tournament";
        default: return "dynamic";
    }
}

std::string crossover_name(CrossoverKind c) {
    switch (c) {
        case CrossoverKind::two_point: return "two_point";
        case CrossoverKind::average: return "average";
        default: return "none";
    }
}

void SelectionConfig::validate() const {
    if (batch_size < 1) throw Error("batch_size must be at least 1");
    if (archive_size < 1) throw Error("archive_size must be at least 1");
    if (method == SelectionMethod::qdo) {
        const int g = static_cast<int>(std::lround(std::sqrt(static_cast<double>(archive_size))));
        if (g * g != archive_size) {
            throw Error("qdo archive_size must be a perfect square");
        }
    }
}

void AdaptiveProbability::finish_iteration(std::vector<Record> records) {
    history_.push_back(std::move(records));
    while (history_.size() > static_cast<std::size_t>(window)) history_.pop_front();

    std::size_t count_a = 0, count_b = 0;
    double sum_a = 0.0, sum_b = 0.0;
    for (const auto& slot : history_) {
        for (const Record& rec : slot) {
            if (rec.origin_a) {
                ++count_a;
                sum_a += rec.loss;
            } else {
                ++count_b;
                sum_b += rec.loss;
            }
        }
    }
    if (count_a < static_cast<std::size_t>(min_count) || count_b < static_cast<std::size_t>(min_count)) {
        return;
    }
    const double avg_a = sum_a / static_cast<double>(count_a);
    const double avg_b = sum_b / static_cast<double>(count_b);
    const double denom = avg_a + avg_b;
    if (denom == 0.0) return;  // both origins perfect, nothing to learn
    p_ = clamp(1.0 - avg_a / denom, lower_, upper_);
}

const std::unordered_set<RepetitionVector, RepetitionVectorHash>& SeenSet::produced_from(
    const RepetitionVector& parent) const {
    static const std::unordered_set<RepetitionVector, RepetitionVectorHash> empty;
    auto it = produced_.find(parent);
    return it == produced_.end() ? empty : it->second;
}

void SeenSet::record_produced(const RepetitionVector& parent, const RepetitionVector& child) {
    produced_[parent].insert(child);
    produced_.try_emplace(child);  // known vector with nothing produced from it yet
}

std::vector<RepetitionVector> init_population(const PredictionSet& pred, InitStrategy strategy,
                                              Rng& rng) {
    const std::size_t m = pred.n_models();
    if (m == 0) throw Error("init_population: empty pool");
    std::vector<RepetitionVector> out;

    if (m == 1 || strategy == InitStrategy::L1) {
        for (std::size_t i = 0; i < m; ++i) out.push_back(RepetitionVector::one_hot(m, i));
        return out;
    }
    if (strategy == InitStrategy::L2_single_best) {
        const std::size_t best = single_best_index(pred);
        for (std::size_t i = 0; i < m; ++i) {
            if (i == best) continue;
            RepetitionVector r = RepetitionVector::one_hot(m, best);
            r.counts[i] = 1;
            out.push_back(r);
        }
        return out;
    }
    // random_L2: distinct two-model ensembles drawn without replacement.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
    }
    rng.shuffle(pairs);
    const std::size_t take = std::min(m, pairs.size());
    for (std::size_t p = 0; p < take; ++p) {
        RepetitionVector r = RepetitionVector::zeros(m);
        r.counts[pairs[p].first] = 1;
        r.counts[pairs[p].second] = 1;
        out.push_back(r);
    }
    return out;
}

std::optional<RepetitionVector> mutate(const RepetitionVector& parent, SeenSet& seen, int increment,
                                       Rng& rng) {
    if (increment < 1) throw Error("mutate: increment must be positive");
    const auto& produced = seen.produced_from(parent);
    std::vector<std::size_t> open;
    RepetitionVector candidate = parent;
    for (std::size_t i = 0; i < parent.size(); ++i) {
        candidate.counts[i] += increment;
        if (!produced.contains(candidate)) open.push_back(i);
        candidate.counts[i] -= increment;
    }
    if (open.empty()) return std::nullopt;  // exhausted parent
    const std::size_t pick = open[rng.index(open.size())];
    candidate.counts[pick] += increment;
    seen.record_produced(parent, candidate);
    return candidate;
}

RepetitionVector crossover_average(const RepetitionVector& a, const RepetitionVector& b) {
    if (a.size() != b.size()) throw Error("crossover: parent length mismatch");
    RepetitionVector out = RepetitionVector::zeros(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.counts[i] = (a.counts[i] + b.counts[i] + 1) / 2;  // ceil of the mean
    }
    return out;
}

std::vector<RepetitionVector> crossover_two_point_at(const RepetitionVector& a,
                                                     const RepetitionVector& b, int cut1,
                                                     int cut2) {
    if (a.size() != b.size()) throw Error("crossover: parent length mismatch");
    std::vector<std::size_t> joint;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.counts[i] > 0 || b.counts[i] > 0) joint.push_back(i);
    }
    const int u = static_cast<int>(joint.size());
    if (u < 3) return {crossover_average(a, b)};
    if (cut1 > cut2) std::swap(cut1, cut2);
    if (cut1 < 0 || cut2 > u || cut1 == cut2) throw Error("crossover: invalid cut positions");

    RepetitionVector child1 = a, child2 = b;
    for (int p = cut1; p < cut2; ++p) {
        std::swap(child1.counts[joint[p]], child2.counts[joint[p]]);
    }
    std::vector<RepetitionVector> out;
    if (!child1.empty()) out.push_back(std::move(child1));
    if (!child2.empty() && (out.empty() || out.front() != child2)) out.push_back(std::move(child2));
    if (out.empty()) return {crossover_average(a, b)};
    return out;
}

std::vector<RepetitionVector> crossover_two_point(const RepetitionVector& a,
                                                  const RepetitionVector& b, Rng& rng) {
    std::vector<std::size_t> joint;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.counts[i] > 0 || b.counts[i] > 0) joint.push_back(i);
    }
    const std::size_t u = joint.size();
    if (u < 3) return {crossover_average(a, b)};
    // Two distinct cut positions out of u+1, ends allowed.
    std::size_t cut1 = rng.index(u + 1);
    std::size_t cut2 = rng.index(u);
    if (cut2 >= cut1) ++cut2;
    return crossover_two_point_at(a, b, static_cast<int>(std::min(cut1, cut2)),
                                  static_cast<int>(std::max(cut1, cut2)));
}

std::vector<double> tournament_probabilities(std::size_t n) {
    if (n == 0) throw Error("tournament_probabilities: empty tournament");
    std::vector<double> p(n);
    double mass = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        p[k] = 0.8 * std::pow(0.2, static_cast<double>(k));
        mass -= p[k];
    }
    p[0] += mass;  // leftover tail mass goes to the best-ranked candidate
    return p;
}

namespace {

// Fill-in parent for undersized archives: mutate a random member of the
// initial population. A member has at most size() fresh children per
// increment, so starting the scan at 1 + produced/size() skips increments
// that cannot have anything left and keeps repeated fills cheap.
RepetitionVector fill_from_init(const std::vector<RepetitionVector>& init_pop, SeenSet& seen,
                                int increment, Rng& rng) {
    const RepetitionVector& base = init_pop[rng.index(init_pop.size())];
    const int hint = 1 + static_cast<int>(seen.produced_from(base).size() / base.size());
    for (int inc = std::max(increment, hint);; ++inc) {
        if (auto m = mutate(base, seen, inc, rng)) return *m;
    }
}

struct RankedCandidate {
    RepetitionVector r;
    double loss = 0.0;
    std::uint64_t seq = 0;
};

std::vector<RankedCandidate> ranked_entries(const Archive& archive) {
    std::vector<RankedCandidate> out;
    for (const ArchiveEntry& e : archive.entries()) out.push_back({e.r, e.loss, e.seq});
    std::sort(out.begin(), out.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
        if (a.loss != b.loss) return a.loss < b.loss;
        return a.seq < b.seq;
    });
    return out;
}

}  // namespace

ParentSample sample_parents(const Archive& archive, SamplingStrategy strategy, double dynamic_p,
                            int k, const std::vector<RepetitionVector>& init_pop, SeenSet& seen,
                            int increment, Rng& rng) {
    if (k < 1) throw Error("sample_parents: k must be positive");
    ParentSample out;

    auto take_lowest = [&]() {
        std::vector<RankedCandidate> ranked = ranked_entries(archive);
        for (int i = 0; i < k && i < static_cast<int>(ranked.size()); ++i) {
            out.parents.push_back(ranked[i].r);
        }
    };
    auto take_uniform = [&]() {
        std::vector<RankedCandidate> ranked = ranked_entries(archive);
        std::vector<std::size_t> idx(ranked.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        rng.shuffle(idx);
        for (int i = 0; i < k && i < static_cast<int>(idx.size()); ++i) {
            out.parents.push_back(ranked[idx[i]].r);
        }
    };

    switch (strategy) {
        case SamplingStrategy::deterministic:
            take_lowest();
            break;
        case SamplingStrategy::dynamic:
            out.deterministic_mode = rng.uniform() < dynamic_p;
            if (out.deterministic_mode) {
                take_lowest();
            } else {
                take_uniform();
            }
            break;
        case SamplingStrategy::tournament: {
            const std::size_t t = static_cast<std::size_t>(10) * k;
            std::vector<RankedCandidate> candidates;
            std::vector<RankedCandidate> ranked = ranked_entries(archive);
            if (ranked.size() >= t) {
                std::vector<std::size_t> idx(ranked.size());
                for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
                rng.shuffle(idx);
                idx.resize(t);
                std::sort(idx.begin(), idx.end());  // ranked order is (loss, seq) already
                for (std::size_t i : idx) candidates.push_back(ranked[i]);
            } else {
                candidates = ranked;
                std::uint64_t synth_seq = 0;
                while (candidates.size() < t) {
                    // Unevaluated fill-ins rank behind every archive entry.
                    candidates.push_back({fill_from_init(init_pop, seen, increment, rng),
                                          std::numeric_limits<double>::infinity(), synth_seq++});
                }
                std::stable_sort(candidates.begin(), candidates.end(),
                                 [](const RankedCandidate& a, const RankedCandidate& b) {
                                     if (a.loss != b.loss) return a.loss < b.loss;
                                     return false;
                                 });
            }
            std::vector<double> probs = tournament_probabilities(candidates.size());
            std::vector<bool> used(candidates.size(), false);
            for (int w = 0; w < k; ++w) {
                double mass = 0.0;
                for (std::size_t i = 0; i < probs.size(); ++i) {
                    if (!used[i]) mass += probs[i];
                }
                double u = rng.uniform() * mass;
                std::size_t winner = 0;
                bool found = false;
                for (std::size_t i = 0; i < probs.size(); ++i) {
                    if (used[i]) continue;
                    winner = i;
                    found = true;
                    if (u < probs[i]) break;
                    u -= probs[i];
                }
                if (!found) break;  // fewer distinct candidates than winners requested
                used[winner] = true;
                out.parents.push_back(candidates[winner].r);
            }
            break;
        }
    }

    while (out.parents.size() < static_cast<std::size_t>(k)) {
        out.parents.push_back(fill_from_init(init_pop, seen, increment, rng));
    }
    return out;
}

std::pair<RepetitionVector, double> best_solution(const Archive& archive,
                                                  const PredictionSet& pred, Metric metric) {
    const std::vector<ArchiveEntry> entries = archive.entries();
    if (entries.empty()) throw Error("best_solution: archive is empty");

    const RepetitionVector sb = RepetitionVector::one_hot(pred.n_models(), single_best_index(pred));
    RepetitionVector fold = entries.front().r;
    for (std::size_t i = 1; i < entries.size(); ++i) {
        fold = crossover_average(fold, entries[i].r);
    }
    const ArchiveEntry& top = archive.best();

    std::pair<RepetitionVector, double> pick{sb, ensemble_loss(pred, sb, metric)};
    const double fold_loss = ensemble_loss(pred, fold, metric);
    if (fold_loss < pick.second) pick = {fold, fold_loss};
    if (top.loss < pick.second) pick = {top.r, top.loss};
    return pick;
}

namespace {

struct PendingSolution {
    RepetitionVector r;
    bool via_crossover = false;
    bool mutated_after = false;
    bool deterministic_mode = false;
};

class QdoesRun {
public:
    QdoesRun(const PredictionSet& pred, Metric metric, const SelectionConfig& cfg,
             std::size_t budget, const ConfigSpaceInfo& ranges)
        : pred_(pred),
          cfg_(cfg),
          budget_(budget),
          rng_(cfg.seed),
          eval_(pred, metric),
          archive_(cfg.method == SelectionMethod::qdo
                       ? Archive(SlidingGridArchive(cfg.archive_size))
                       : Archive(QualityArchive(cfg.archive_size))),
          p_dynamic_(0.05, 0.95),
          p_crossover_(0.1, 0.9),
          p_mutate_after_(0.1, 0.9) {
        if (budget_ == 0) throw Error("qdoes_select: budget must be positive");
        if (cfg.method == SelectionMethod::qdo) {
            diversity_.emplace(pred, ranges);
        }
    }

    SelectionResult run() {
        init_pop_ = init_population(pred_, cfg_.init, rng_);

        std::vector<ArchiveOffer> offers;
        for (const RepetitionVector& r : init_pop_) {
            if (used_ == budget_) break;
            offers.push_back(evaluate(r));
            seen_.mark(r);
        }
        archive_.insert(offers);
        trajectory_.push_back(archive_.best().loss);

        while (used_ < budget_) {
            const std::size_t target = std::min<std::size_t>(cfg_.batch_size, budget_ - used_);
            run_batch(target);
            trajectory_.push_back(archive_.best().loss);
        }

        auto [r, loss] = best_solution(archive_, pred_, eval_.metric());
        SelectionResult res;
        res.repetitions = r;
        res.weights = weights_from_repetitions(r);
        res.validation_loss = loss;
        res.eval_count = eval_.count();
        res.trajectory = std::move(trajectory_);
        return res;
    }

private:
    ArchiveOffer evaluate(const RepetitionVector& r) {
        ArchiveOffer o;
        o.r = r;
        o.loss = eval_.loss(r);
        if (diversity_) o.desc = diversity_->behavior(r);
        ++used_;
        return o;
    }

    void run_batch(std::size_t target) {
        std::vector<PendingSolution> batch;
        int increment = 1;
        int mutation_rejections = 0;
        int crossover_rejections = 0;
        bool force_mutate_after = false;
        long stall_guard = 0;

        auto note_mutation_rejection = [&] {
            if (++mutation_rejections >= 50) {
                ++increment;
                mutation_rejections = 0;
            }
        };
        auto note_crossover_rejection = [&] {
            if (++crossover_rejections >= 50) {
                force_mutate_after = true;
                crossover_rejections = 0;
            }
        };

        while (batch.size() < target) {
            if (++stall_guard > 1000000) throw Error("qdoes_select: batch construction stalled");

            const bool use_crossover =
                cfg_.crossover != CrossoverKind::none && rng_.uniform() < p_crossover_.value();

            if (!use_crossover) {
                ParentSample ps = sample_parents(archive_, cfg_.sampling, p_dynamic_.value(), 1,
                                                 init_pop_, seen_, increment, rng_);
                auto child = mutate(ps.parents.front(), seen_, increment, rng_);
                if (!child) {  // exhausted parent, sample afresh
                    note_mutation_rejection();
                    continue;
                }
                if (seen_.contains(*child)) {
                    note_mutation_rejection();
                    continue;
                }
                seen_.mark(*child);
                batch.push_back({std::move(*child), false, false, ps.deterministic_mode});
                continue;
            }

            ParentSample ps = sample_parents(archive_, cfg_.sampling, p_dynamic_.value(), 2,
                                             init_pop_, seen_, increment, rng_);
            std::vector<RepetitionVector> children =
                cfg_.crossover == CrossoverKind::two_point
                    ? crossover_two_point(ps.parents[0], ps.parents[1], rng_)
                    : std::vector<RepetitionVector>{
                          crossover_average(ps.parents[0], ps.parents[1])};

            for (RepetitionVector& child : children) {
                if (batch.size() == target) break;
                bool mutated = false;
                if (force_mutate_after || rng_.uniform() < p_mutate_after_.value()) {
                    if (auto m = mutate(child, seen_, increment, rng_)) {
                        child = std::move(*m);
                        mutated = true;
                    } else {
                        note_mutation_rejection();  // nothing fresh from this child
                    }
                }
                if (seen_.contains(child)) {
                    if (mutated) {
                        note_mutation_rejection();
                    } else {
                        note_crossover_rejection();
                    }
                    continue;
                }
                seen_.mark(child);
                batch.push_back({std::move(child), true, mutated, ps.deterministic_mode});
            }
        }

        std::vector<ArchiveOffer> offers;
        std::vector<AdaptiveProbability::Record> crossover_records;
        std::vector<AdaptiveProbability::Record> mutate_after_records;
        std::vector<AdaptiveProbability::Record> sampling_records;
        for (const PendingSolution& p : batch) {
            ArchiveOffer o = evaluate(p.r);
            if (cfg_.crossover != CrossoverKind::none) {
                crossover_records.push_back({p.via_crossover, o.loss});
                if (p.via_crossover) mutate_after_records.push_back({p.mutated_after, o.loss});
            }
            if (cfg_.sampling == SamplingStrategy::dynamic) {
                sampling_records.push_back({p.deterministic_mode, o.loss});
            }
            offers.push_back(std::move(o));
        }
        archive_.insert(offers);

        if (cfg_.crossover != CrossoverKind::none) {
            p_crossover_.finish_iteration(std::move(crossover_records));
            p_mutate_after_.finish_iteration(std::move(mutate_after_records));
        }
        if (cfg_.sampling == SamplingStrategy::dynamic) {
            p_dynamic_.finish_iteration(std::move(sampling_records));
        }
    }

    const PredictionSet& pred_;
    const SelectionConfig& cfg_;
    std::size_t budget_;
    std::size_t used_ = 0;
    Rng rng_;
    LossEvaluator eval_;
    Archive archive_;
    std::optional<DiversityCache> diversity_;
    AdaptiveProbability p_dynamic_;
    AdaptiveProbability p_crossover_;
    AdaptiveProbability p_mutate_after_;
    SeenSet seen_;
    std::vector<RepetitionVector> init_pop_;
    std::vector<double> trajectory_;
};

}  // namespace

SelectionResult qdoes_select(const PredictionSet& pred, Metric metric, const SelectionConfig& cfg,
                             std::size_t budget, const ConfigSpaceInfo& ranges) {
    cfg.validate();
    QdoesRun run(pred, metric, cfg, budget, ranges);
    return run.run();
}

}  // namespace ensel
