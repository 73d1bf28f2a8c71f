#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ensel/archive.hpp"
#include "ensel/metrics.hpp"
#include "ensel/random.hpp"

namespace ensel {

enum class SelectionMethod { qo, qdo };
enum class InitStrategy { L1, L2_single_best, random_L2 };
enum class SamplingStrategy { deterministic, tournament, dynamic };
enum class CrossoverKind { two_point, average, none };

InitStrategy parse_init(const std::string& name);
SamplingStrategy parse_sampling(const std::string& name);
CrossoverKind parse_crossover(const std::string& name);
std::string init_name(InitStrategy);
std::string sampling_name(SamplingStrategy);
std::string crossover_name(CrossoverKind);

struct SelectionConfig {
    SelectionMethod method = SelectionMethod::qo;
    int batch_size = 20;
    int archive_size = 16;
    InitStrategy init = InitStrategy::L2_single_best;
    SamplingStrategy sampling = SamplingStrategy::tournament;
    CrossoverKind crossover = CrossoverKind::two_point;
    std::uint64_t seed = 0;

    void validate() const;
};

// Probability adapted from the relative performance of two solution origins.
// Records are grouped per iteration; the update looks at the last `window`
// iterations and leaves the value unchanged unless both origins contributed
// at least `min_count` solutions. Lower mean loss moves probability mass
// towards that origin, clamped to [lower, upper].
class AdaptiveProbability {
public:
    AdaptiveProbability(double lower, double upper)
        : lower_(lower), upper_(upper) {}

    double value() const { return p_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }

    struct Record {
        bool origin_a = false;
        double loss = 0.0;
    };

    void finish_iteration(std::vector<Record> records);

    static constexpr int window = 10;
    static constexpr int min_count = 2;

private:
    double p_ = 0.5;
    double lower_;
    double upper_;
    std::deque<std::vector<Record>> history_;
};

// Tracks which repetition vectors were already evaluated in a run (so nothing
// is evaluated twice) and, per parent, which mutation outputs were already
// produced from it.
class SeenSet {
public:
    bool contains(const RepetitionVector& r) const { return evaluated_.contains(r); }
    void mark(const RepetitionVector& r) { evaluated_.insert(r); }
    std::size_t size() const { return evaluated_.size(); }

    const std::unordered_set<RepetitionVector, RepetitionVectorHash>& produced_from(
        const RepetitionVector& parent) const;
    void record_produced(const RepetitionVector& parent, const RepetitionVector& child);

private:
    std::unordered_set<RepetitionVector, RepetitionVectorHash> evaluated_;
    std::unordered_map<RepetitionVector, std::unordered_set<RepetitionVector, RepetitionVectorHash>,
                       RepetitionVectorHash>
        produced_;
};

// Initial solutions for the archive. L1: all single-model ensembles.
// L2_single_best: all two-model ensembles containing the best single model.
// random_L2: distinct random two-model ensembles, as many as models (fewer
// when not that many exist). Pools with one model fall back to L1.
std::vector<RepetitionVector> init_population(const PredictionSet& pred, InitStrategy strategy,
                                              Rng& rng);

// One-element increment of the parent, chosen uniformly among the increments
// not previously produced from it; the choice is recorded. nullopt signals an
// exhausted parent (every increment was already produced).
std::optional<RepetitionVector> mutate(const RepetitionVector& parent, SeenSet& seen, int increment,
                                       Rng& rng);

// Element-wise ceiling mean of the two parents.
RepetitionVector crossover_average(const RepetitionVector& a, const RepetitionVector& b);

// Two-point crossover on the joint support. Fewer than 3 support positions
// falls back to average crossover; all-zero children are dropped (both
// all-zero falls back to average); duplicate children collapse to one.
std::vector<RepetitionVector> crossover_two_point(const RepetitionVector& a,
                                                  const RepetitionVector& b, Rng& rng);

// Deterministic core of the two-point crossover: swap the support segment
// [cut1, cut2) between the parents. Exposed for direct testing.
std::vector<RepetitionVector> crossover_two_point_at(const RepetitionVector& a,
                                                     const RepetitionVector& b, int cut1, int cut2);

// Winner distribution of a loss-ranked tournament: rank k gets 0.8 * 0.2^k,
// the leftover mass goes to rank 0.
std::vector<double> tournament_probabilities(std::size_t n);

struct ParentSample {
    std::vector<RepetitionVector> parents;
    bool deterministic_mode = false;  // meaningful for dynamic sampling only
};

// Draws k parents from the archive. deterministic: the k lowest-loss entries.
// tournament: 10k uniformly drawn candidates ranked by loss, winners drawn
// without replacement from the rank distribution. dynamic: deterministic with
// probability dynamic_p, else uniform without replacement. When the archive
// holds fewer entries than needed, the shortfall is filled by mutating
// members of the initial population.
ParentSample sample_parents(const Archive& archive, SamplingStrategy strategy, double dynamic_p,
                            int k, const std::vector<RepetitionVector>& init_pop, SeenSet& seen,
                            int increment, Rng& rng);

// Final ensemble pick: the best single model, the average crossover folded
// over all archive entries, and the archive's best entry are evaluated on
// validation; the lowest loss wins, ties in that order. Because the single
// best model is always a candidate, the result never scores below it.
std::pair<RepetitionVector, double> best_solution(const Archive& archive,
                                                  const PredictionSet& pred, Metric metric);

// Population-based ensemble selection over repetition vectors. method qo
// keeps a pure quality archive; method qdo keeps a behaviour-space grid and
// needs the pool's config-space ranges for the css descriptor. Spends exactly
// `budget` loss evaluations (initial population included) in batches of
// cfg.batch_size plus one remainder batch.
SelectionResult qdoes_select(const PredictionSet& pred, Metric metric, const SelectionConfig& cfg,
                             std::size_t budget, const ConfigSpaceInfo& ranges);

}  // namespace ensel
