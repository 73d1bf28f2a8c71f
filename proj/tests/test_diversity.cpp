#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ensel/diversity.hpp"
#include "ensel/random.hpp"
#include "helpers.hpp"

using namespace ensel;
using testutil::mat;
using testutil::reps;

namespace {

double pearson_oracle(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    const bool const_a = std::all_of(a.begin(), a.end(), [&](double v) { return v == a[0]; });
    const bool const_b = std::all_of(b.begin(), b.end(), [&](double v) { return v == b[0]; });
    if (const_a || const_b) return a == b ? 1.0 : 0.0;
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        da += (a[i] - ma) * (a[i] - ma);
        db += (b[i] - mb) * (b[i] - mb);
    }
    return std::clamp(num / std::sqrt(da * db), -1.0, 1.0);
}

ConfigMap cfg(std::initializer_list<std::pair<std::string, ConfigValue>> kv) {
    ConfigMap m;
    for (auto& [k, v] : kv) m[k] = v;
    return m;
}

}  // namespace

TEST_CASE("loss correlation worked cases") {
    // dyadic values keep the arithmetic exact
    CHECK(loss_correlation({0.25, 0.75, 0.25, 0.75}, {0.75, 0.25, 0.75, 0.25}) == -1.0);
    CHECK(loss_correlation({0.25, 0.5, 0.75}, {0.5, 0.625, 0.75}) == 1.0);
    CHECK(loss_correlation({0.1, 0.2, 0.3}, {0.2, 0.4, 0.6}) == doctest::Approx(1.0).epsilon(1e-12));
    SUBCASE("constant vector convention") {
        CHECK(loss_correlation({0.5, 0.5}, {0.5, 0.5}) == 1.0);       // identical constants
        CHECK(loss_correlation({0.5, 0.5}, {0.4, 0.4}) == 0.0);       // different constants
        CHECK(loss_correlation({0.5, 0.5}, {0.1, 0.9}) == 0.0);      // one constant
    }
    SUBCASE("matches a direct recomputation") {
        Rng rng(17);
        for (int trial = 0; trial < 200; ++trial) {
            const int n = 3 + static_cast<int>(rng.index(20));
            std::vector<double> a(n), b(n);
            for (int i = 0; i < n; ++i) {
                a[i] = rng.index(4) / 4.0;  // coarse values provoke degeneracies
                b[i] = rng.index(4) / 4.0;
            }
            const double got = loss_correlation(a, b);
            CHECK(got == doctest::Approx(pearson_oracle(a, b)).epsilon(1e-12));
            CHECK(got >= -1.0);
            CHECK(got <= 1.0);
        }
    }
}

TEST_CASE("gower similarity on mixed configs") {
    ConfigSpaceInfo info;
    info.numeric_ranges["x"] = 4.0;

    SUBCASE("numeric and categorical average") {
        const ConfigMap a = cfg({{"x", 1.0}, {"kind", std::string("u")}});
        const ConfigMap b = cfg({{"x", 3.0}, {"kind", std::string("u")}});
        CHECK(gower_similarity(a, b, info) == (0.5 + 1.0) / 2.0);
    }
    SUBCASE("categorical mismatch scores zero") {
        const ConfigMap a = cfg({{"kind", std::string("u")}});
        const ConfigMap b = cfg({{"kind", std::string("v")}});
        CHECK(gower_similarity(a, b, info) == 0.0);
    }
    SUBCASE("zero range counts as identical") {
        ConfigSpaceInfo flat;
        flat.numeric_ranges["x"] = 0.0;
        const ConfigMap a = cfg({{"x", 2.0}});
        const ConfigMap b = cfg({{"x", 2.0}});
        CHECK(gower_similarity(a, b, flat) == 1.0);
    }
    SUBCASE("only shared keys participate") {
        const ConfigMap a = cfg({{"x", 1.0}, {"only_a", 9.0}});
        const ConfigMap b = cfg({{"x", 1.0}, {"only_b", 1.0}});
        CHECK(gower_similarity(a, b, info) == 1.0);
    }
    SUBCASE("no shared keys is an error") {
        const ConfigMap a = cfg({{"p", 1.0}});
        const ConfigMap b = cfg({{"q", 1.0}});
        CHECK_THROWS_AS(gower_similarity(a, b, info), Error);
    }
    SUBCASE("difference larger than the recorded range clamps at zero") {
        const ConfigMap a = cfg({{"x", 0.0}});
        const ConfigMap b = cfg({{"x", 99.0}});
        CHECK(gower_similarity(a, b, info) == 0.0);
    }
    SUBCASE("numeric against categorical under the same key is a mismatch") {
        const ConfigMap a = cfg({{"x", 1.0}});
        const ConfigMap b = cfg({{"x", std::string("one")}});
        CHECK(gower_similarity(a, b, info) == 0.0);
    }
}

TEST_CASE("config space info collects numeric ranges") {
    PredictionSet p = testutil::pool({mat({{0.5, 0.5}}), mat({{0.5, 0.5}}), mat({{0.5, 0.5}})},
                                     {0});
    p.configs[0] = cfg({{"lr", 0.1}, {"depth", 2.0}});
    p.configs[1] = cfg({{"lr", 0.7}, {"kind", std::string("a")}});
    p.configs[2] = cfg({{"lr", 0.4}});
    const ConfigSpaceInfo info = ConfigSpaceInfo::from_pool(p);
    CHECK(info.numeric_ranges.at("lr") == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(info.numeric_ranges.at("depth") == 0.0);  // single observation
    CHECK(info.numeric_ranges.count("kind") == 0);
}

TEST_CASE("effective config injects the algorithm") {
    PredictionSet p = testutil::pool({mat({{0.5, 0.5}}), mat({{0.5, 0.5}})}, {0}, {},
                                     {"forest", "linear"});
    const ConfigMap c = effective_config(p, 1);
    CHECK(std::get<std::string>(c.at("algorithm")) == "linear");
}

TEST_CASE("alc and css on hand built ensembles") {
    // two models with exactly opposite loss patterns and distinct algorithms
    PredictionSet p = testutil::pool(
        {testutil::binary_from_true_prob({0.75, 0.25, 0.75, 0.25}, {0, 0, 1, 1}),
         testutil::binary_from_true_prob({0.25, 0.75, 0.25, 0.75}, {0, 0, 1, 1})},
        {0, 0, 1, 1}, {}, {"a", "b"});
    const ConfigSpaceInfo info = ConfigSpaceInfo::from_pool(p);

    CHECK(alc(p, reps({1, 1})) == -1.0);
    CHECK(css(p, reps({1, 1}), info) == 1.0);  // only the algorithm key, mismatching

    SUBCASE("single model convention") {
        CHECK(alc(p, reps({2, 0})) == 1.0);
        CHECK(css(p, reps({0, 3}), info) == 0.0);
        const BehaviorDescriptor d = behavior(p, reps({1, 0}), info);
        CHECK(d.alc == 1.0);
        CHECK(d.css == 0.0);
    }
    SUBCASE("repetitions do not change the descriptor, support does") {
        CHECK(behavior(p, reps({1, 1}), info) == behavior(p, reps({3, 2}), info));
    }
    SUBCASE("same algorithm makes css zero") {
        PredictionSet q = testutil::pool(
            {testutil::binary_from_true_prob({0.75, 0.25}, {0, 1}),
             testutil::binary_from_true_prob({0.25, 0.75}, {0, 1})},
            {0, 1}, {}, {"a", "a"});
        CHECK(css(q, reps({1, 1}), ConfigSpaceInfo::from_pool(q)) == 0.0);
    }
}

TEST_CASE("alc of a three model ensemble is the pairwise mean") {
    Rng rng(41);
    PredictionSet p = testutil::random_pool(rng, 3, 25, 2);
    const auto lv = loss_vectors(p);
    const double expect = (pearson_oracle(lv[0], lv[1]) + pearson_oracle(lv[0], lv[2]) +
                           pearson_oracle(lv[1], lv[2])) /
                          3.0;
    CHECK(alc(p, reps({1, 1, 1})) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("descriptor oracle on random ensembles") {
    Rng rng(99);
    const std::vector<std::string> families{"forest", "linear", "boost"};
    for (int trial = 0; trial < 60; ++trial) {
        const int m = 2 + static_cast<int>(rng.index(5));
        const int n = 10 + static_cast<int>(rng.index(30));
        PredictionSet p = testutil::random_pool(rng, m, n, 2);
        for (int i = 0; i < m; ++i) {
            p.algorithms[i] = families[rng.index(3)];
            p.configs[i] = cfg({{"lr", rng.uniform()}, {"depth", double(rng.index(10))}});
        }
        const ConfigSpaceInfo info = ConfigSpaceInfo::from_pool(p);

        RepetitionVector r = RepetitionVector::zeros(m);
        for (int i = 0; i < m; ++i) r.counts[i] = static_cast<int>(rng.index(3));
        if (r.empty()) r.counts[rng.index(m)] = 1;

        // direct mean-over-pairs recomputation on the support
        const auto sup = r.support();
        const auto lv = loss_vectors(p);
        double expect_alc = 1.0, expect_css = 0.0;
        if (sup.size() > 1) {
            double sum_rho = 0.0, sum_dis = 0.0;
            std::size_t pairs = 0;
            for (std::size_t x = 0; x < sup.size(); ++x) {
                for (std::size_t y = x + 1; y < sup.size(); ++y) {
                    sum_rho += pearson_oracle(lv[sup[x]], lv[sup[y]]);
                    sum_dis += 1.0 - gower_similarity(effective_config(p, sup[x]),
                                                      effective_config(p, sup[y]), info);
                    ++pairs;
                }
            }
            expect_alc = sum_rho / pairs;
            expect_css = sum_dis / pairs;
        }

        const BehaviorDescriptor d = behavior(p, r, info);
        CHECK(d.alc == doctest::Approx(expect_alc).epsilon(1e-12));
        CHECK(d.css == doctest::Approx(expect_css).epsilon(1e-12));
        CHECK(d.alc >= -1.0);
        CHECK(d.alc <= 1.0);
        CHECK(d.css >= 0.0);
        CHECK(d.css <= 1.0);

        // the cache must agree bit for bit with the direct path
        const DiversityCache cache(p, info);
        const BehaviorDescriptor cached = cache.behavior(r);
        CHECK(cached.alc == d.alc);
        CHECK(cached.css == d.css);
    }
}
