#include "ensel/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ensel/random.hpp"

namespace ensel {

namespace {

struct FamilyDef {
    const char* name;
    const char* numeric_key;
    double lo;
    double hi;
};

constexpr FamilyDef kFamilies[] = {
    {"forest", "max_depth", 2.0, 12.0},
    {"linear", "regularization", 1e-4, 1.0},
    {"boost", "num_rounds", 50.0, 500.0},
};

constexpr const char* kPreprocessors[] = {"none", "scale", "pca"};

// A pool is more than a bag of i.i.d. predictors. The generated pool has one
// clearly strongest "anchor" model that is sharply miscalibrated on a small
// band of instances everyone else gets right by a whisker, a group of
// complementary mid-strength models whose independent mistakes blend away,
// and redundant weak models whose mistakes pile up in the same places and so
// never pay off in a blend. This mirrors real pools, where the top model by
// validation score is not automatically the best ingredient.
enum Role { kAnchor = 0, kBlender, kRedundant };

struct RoleSet {
    bool structured = false;
    std::vector<int> role;
    std::vector<double> plan_acc;  // target accuracy of the model's own opinion
};

RoleSet assign_roles(Rng& rng, const SynthSpec& spec) {
    const int m = spec.n_models;
    const double lo = spec.accuracy_lo;
    const double hi = spec.accuracy_hi;
    const double width = hi - lo;

    RoleSet rs;
    rs.role.assign(m, kBlender);
    rs.plan_acc.assign(m, hi);
    rs.structured = m >= 4;
    if (!rs.structured) {
        for (int i = 0; i < m; ++i) rs.plan_acc[i] = rng.uniform(lo, hi);
        return rs;
    }

    const int blenders = std::max(2, m / 4);
    rs.role[0] = kAnchor;
    for (int i = 1 + blenders; i < m; ++i) rs.role[i] = kRedundant;

    for (int i = 0; i < m; ++i) {
        switch (rs.role[i]) {
            case kAnchor: rs.plan_acc[i] = hi; break;
            case kBlender: rs.plan_acc[i] = hi - rng.uniform(0.60, 0.78) * width; break;
            case kRedundant: rs.plan_acc[i] = lo + rng.uniform(0.05, 0.25) * width; break;
        }
    }
    return rs;
}

// Instance regions within one split. The blind band is where the anchor is
// confidently wrong while everyone else is right by a hair; the swamp is
// where the redundant models all fail together; the contested band is a belt
// of genuinely borderline instances every model hedges on, which keeps the
// scores of both classes tightly interleaved around the decision boundary.
enum Region { kOpen = 0, kSwamp, kBlind, kContested };

// Per-pair prediction style.
enum Style { kSolid = 0, kWhisker, kConfident, kLean };

struct SplitPlan {
    std::vector<int> labels;
    std::vector<int> rivals;
    std::vector<int> region;
    std::vector<std::vector<unsigned char>> wrong;  // model's own opinion errs
    std::vector<std::vector<unsigned char>> style;
};

SplitPlan plan_split(Rng& rng, const SynthSpec& spec, const RoleSet& roles) {
    const int n = spec.n_instances;
    const int k = spec.n_classes;
    const int m = spec.n_models;

    SplitPlan sp;
    sp.labels.resize(n);
    sp.rivals.resize(n);
    sp.region.assign(n, kOpen);
    sp.wrong.assign(m, std::vector<unsigned char>(n, 0));
    sp.style.assign(m, std::vector<unsigned char>(n, kSolid));

    for (int t = 0; t < n; ++t) {
        sp.labels[t] = static_cast<int>(rng.index(k));
        int rival = static_cast<int>(rng.index(k - 1));
        if (rival >= sp.labels[t]) ++rival;
        sp.rivals[t] = rival;
    }

    const double budget = 1.0 - spec.accuracy_hi;
    int n_blind = 0;
    int n_swamp = 0;
    int n_contested = 0;
    if (roles.structured) {
        n_blind = static_cast<int>(n * std::min(0.04, 0.5 * budget));
        n_swamp = static_cast<int>(0.15 * n);
        n_contested = static_cast<int>(0.12 * n);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    std::size_t next = 0;
    for (int c = 0; c < n_blind; ++c) sp.region[order[next++]] = kBlind;
    for (int c = 0; c < n_swamp; ++c) sp.region[order[next++]] = kSwamp;
    for (int c = 0; c < n_contested; ++c) sp.region[order[next++]] = kContested;
    const int n_open = n - n_blind - n_swamp - n_contested;
    const int n_home = n_open + n_swamp;  // where solid errors may land

    if (!roles.structured) {
        for (int i = 0; i < m; ++i) {
            const double fill = 1.0 - roles.plan_acc[i];
            for (int t = 0; t < n; ++t) sp.wrong[i][t] = rng.uniform() < fill;
        }
        return sp;
    }

    // Error budgets are placed with exact counts rather than per-instance coin
    // flips: single-model accuracy gaps between the roles are a deliberate part
    // of the landscape and should not wash out in sampling noise.
    std::vector<int> home;  // open + swamp, in shuffled order
    std::vector<int> open_only;
    std::vector<int> swamp_only;
    home.reserve(n_home);
    for (std::size_t j = 0; j < order.size(); ++j) {
        const int t = static_cast<int>(order[j]);
        if (sp.region[t] == kOpen) open_only.push_back(t);
        if (sp.region[t] == kOpen || sp.region[t] == kSwamp) home.push_back(t);
        if (sp.region[t] == kSwamp) swamp_only.push_back(t);
    }
    auto scatter = [&rng](const std::vector<int>& pool, double want, auto&& mark) {
        std::vector<int> tmp(pool);
        rng.shuffle(tmp);
        const int take =
            std::clamp(static_cast<int>(std::lround(want)), 0, static_cast<int>(tmp.size()));
        for (int j = 0; j < take; ++j) mark(tmp[j]);
    };

    std::vector<int> blender_ids;
    for (int i = 0; i < m; ++i)
        if (roles.role[i] == kBlender) blender_ids.push_back(i);
    const int nb = static_cast<int>(blender_ids.size());

    // Blender mistakes rotate across the pool so that on any home instance only
    // a minority of them is wrong at once: each blender is individually
    // mediocre, yet the group vote stays clean.  A proportional-fair schedule
    // keeps per-blender totals on target and cycles through the subsets.
    std::vector<double> bfill(nb);
    double per_instance = 0.0;
    for (int b = 0; b < nb; ++b) {
        const double target = (1.0 - roles.plan_acc[blender_ids[b]]) * n;
        bfill[b] = std::clamp(target / std::max<std::size_t>(1, home.size()), 0.0, 1.0);
        per_instance += bfill[b];
    }
    std::vector<int> placed(nb, 0);
    int placed_total = 0;
    double due = 0.0;
    std::vector<int> pick(nb);
    for (std::size_t j = 0; j < home.size(); ++j) {
        due += per_instance;
        int s = static_cast<int>(std::lround(due)) - placed_total;
        s = std::clamp(s, 0, nb);
        std::iota(pick.begin(), pick.end(), 0);
        std::sort(pick.begin(), pick.end(), [&](int a, int b2) {
            const double da = bfill[a] * static_cast<double>(j + 1) - placed[a];
            const double db = bfill[b2] * static_cast<double>(j + 1) - placed[b2];
            return da > db;
        });
        for (int c = 0; c < s; ++c) {
            sp.wrong[blender_ids[pick[c]]][home[j]] = 1;
            ++placed[pick[c]];
        }
        placed_total += s;
    }

    for (int i = 0; i < m; ++i) {
        const int role = roles.role[i];
        const double target_errors = (1.0 - roles.plan_acc[i]) * n;
        if (role == kAnchor) {
            for (int t = 0; t < n; ++t) {
                if (sp.region[t] == kBlind) {
                    sp.wrong[i][t] = 1;
                    sp.style[i][t] = kConfident;
                } else if (sp.region[t] == kContested) {
                    sp.style[i][t] = kWhisker;
                }
            }
            scatter(home, target_errors - n_blind, [&](int t) { sp.wrong[i][t] = 1; });
        } else if (role == kBlender) {
            // soft mistakes: a blender that is outvoted concedes, so any clean
            // majority of the group carries the instance
            for (int t = 0; t < n; ++t)
                sp.style[i][t] =
                    (sp.region[t] == kBlind || sp.region[t] == kContested) ? kWhisker
                                                                           : kLean;
        } else {
            // redundant: hedges everywhere, fails across the whole swamp, and
            // spends the rest of its error budget on borderline slips
            for (int t = 0; t < n; ++t) sp.style[i][t] = kWhisker;
            const double on_swamp = std::min<double>(target_errors, n_swamp);
            scatter(swamp_only, on_swamp, [&](int t) {
                sp.wrong[i][t] = 1;
                sp.style[i][t] = kSolid;
            });
            scatter(open_only, target_errors - on_swamp, [&](int t) { sp.wrong[i][t] = 1; });
        }
    }
    return sp;
}

void generate_split(Rng& rng, const SynthSpec& spec, const RoleSet& roles,
                    double shared_accuracy, std::vector<int>& labels,
                    std::vector<Matrix>& probabilities) {
    const int k = spec.n_classes;
    const int n = spec.n_instances;
    const int m = spec.n_models;

    const SplitPlan sp = plan_split(rng, spec, roles);
    labels = sp.labels;
    probabilities.assign(m, Matrix(n, k));
    const double contested = k == 2 ? 1.0 : 0.84;
    const double rest = k == 2 ? 0.0 : (1.0 - contested) / (k - 2);

    for (int t = 0; t < n; ++t) {
        const bool shared_correct = rng.uniform() < shared_accuracy;
        for (int i = 0; i < m; ++i) {
            const bool use_shared = rng.uniform() < spec.correlation;
            const bool correct = use_shared ? shared_correct : !sp.wrong[i][t];
            double f;
            switch (sp.style[i][t]) {
                case kWhisker: f = 0.5 + rng.uniform(0.002, 0.008); break;
                case kConfident:
                    f = correct ? rng.uniform(0.55, 0.65) : rng.uniform(0.86, 0.94);
                    break;
                case kLean:
                    f = correct ? rng.uniform(0.62, 0.80) : rng.uniform(0.52, 0.56);
                    break;
                default:
                    f = correct ? rng.uniform(0.62, 0.80) : rng.uniform(0.58, 0.70);
                    break;
            }
            const int winner = correct ? sp.labels[t] : sp.rivals[t];
            const int loser = correct ? sp.rivals[t] : sp.labels[t];
            for (int c = 0; c < k; ++c) probabilities[i](t, c) = rest;
            probabilities[i](t, winner) = contested * f;
            probabilities[i](t, loser) = contested * (1.0 - f);
        }
    }
}

}  // namespace

Task synth_task(const SynthSpec& spec) {
    if (spec.n_models < 1) throw Error("synth_task: n_models must be at least 1");
    if (spec.n_instances < 2) throw Error("synth_task: n_instances must be at least 2");
    if (spec.n_classes < 2) throw Error("synth_task: n_classes must be at least 2");
    if (!(spec.accuracy_lo >= 0.0) || !(spec.accuracy_hi <= 1.0) ||
        spec.accuracy_lo > spec.accuracy_hi) {
        throw Error("synth_task: accuracy range must satisfy 0 <= lo <= hi <= 1");
    }
    if (spec.correlation < 0.0 || spec.correlation > 1.0) {
        throw Error("synth_task: correlation must lie in [0, 1]");
    }

    Rng rng(spec.seed);
    Task task;
    task.name = spec.name.empty() ? "synth-" + std::to_string(spec.seed) : spec.name;
    task.n_classes = spec.n_classes;
    task.metric = Metric{spec.metric};

    PredictionSet& val = task.validation;
    for (int i = 0; i < spec.n_models; ++i) {
        const FamilyDef& fam = kFamilies[i % std::size(kFamilies)];
        char id[16];
        std::snprintf(id, sizeof(id), "m%03d", i);
        val.model_ids.push_back(id);
        val.algorithms.push_back(fam.name);
        ConfigMap config;
        config["learning_rate"] =
            quantize9(std::pow(10.0, rng.uniform(-3.0, 0.0)));
        config[fam.numeric_key] = quantize9(rng.uniform(fam.lo, fam.hi));
        config["preprocessor"] =
            std::string(kPreprocessors[rng.index(std::size(kPreprocessors))]);
        val.configs.push_back(std::move(config));
    }

    const RoleSet roles = assign_roles(rng, spec);
    const double shared_accuracy = 0.5 * (spec.accuracy_lo + spec.accuracy_hi);

    generate_split(rng, spec, roles, shared_accuracy, val.labels, val.probabilities);

    PredictionSet& test = task.test;
    test.model_ids = val.model_ids;
    test.algorithms = val.algorithms;
    test.configs = val.configs;
    generate_split(rng, spec, roles, shared_accuracy, test.labels, test.probabilities);

    val.val_scores.resize(spec.n_models);
    for (int i = 0; i < spec.n_models; ++i) {
        val.val_scores[i] =
            quantize9(task.metric.score(val.probabilities[i], val.labels));
    }
    test.val_scores = val.val_scores;

    task.validation = PredictionSet::validated(std::move(task.validation), task.name + "/val");
    task.test = PredictionSet::validated(std::move(task.test), task.name + "/test");
    return task;
}

}  // namespace ensel
