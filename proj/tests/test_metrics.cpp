#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ensel/metrics.hpp"
#include "ensel/random.hpp"
#include "helpers.hpp"

using namespace ensel;
using testutil::mat;
using testutil::reps;

namespace {

// O(n^2) pair-counting oracle: P(score_pos > score_neg) with ties counting
// one half.
double auc_pair_counting(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("binary auc worked example") {
    const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
    const std::vector<int> y{0, 0, 1, 1};
    CHECK(roc_auc_binary(s, y) == 0.75);
}

TEST_CASE("binary auc tie handling") {
    CHECK(roc_auc_binary(std::vector<double>{0.2, 0.5, 0.5, 0.9},
                         std::vector<int>{0, 0, 1, 1}) == 0.875);
    // every score equal -> 0.5 exactly
    CHECK(roc_auc_binary(std::vector<double>{0.3, 0.3, 0.3, 0.3},
                         std::vector<int>{0, 1, 0, 1}) == 0.5);
}

TEST_CASE("binary auc extremes") {
    CHECK(roc_auc_binary(std::vector<double>{0.1, 0.2, 0.8, 0.9},
                         std::vector<int>{0, 0, 1, 1}) == 1.0);
    CHECK(roc_auc_binary(std::vector<double>{0.9, 0.8, 0.2, 0.1},
                         std::vector<int>{0, 0, 1, 1}) == 0.0);
}

TEST_CASE("binary auc input validation") {
    CHECK_THROWS_AS(roc_auc_binary(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), Error);
    CHECK_THROWS_AS(roc_auc_binary(std::vector<double>{0.1, 0.2}, std::vector<int>{0, 0}), Error);
    CHECK_THROWS_AS(roc_auc_binary(std::vector<double>{0.1}, std::vector<int>{0, 1}), Error);
    CHECK_THROWS_AS(roc_auc_binary(std::vector<double>{0.1, 0.2}, std::vector<int>{0, 2}), Error);
}

TEST_CASE("binary auc matches pair counting on random inputs") {
    Rng rng(123);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + static_cast<int>(rng.index(60));
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (int i = 0; i < n; ++i) {
            // coarse grid to provoke ties
            s[i] = static_cast<double>(rng.index(8)) / 8.0;
            y[i] = static_cast<int>(rng.index(2));
        }
        y[0] = 0;
        y[1] = 1;
        CHECK(roc_auc_binary(s, y) == doctest::Approx(auc_pair_counting(s, y)).epsilon(1e-12));
    }
}

TEST_CASE("macro ovr auc reduces to binary for two classes") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        PredictionSet p = testutil::random_pool(rng, 1, 30, 2);
        std::vector<double> col1(30);
        for (int t = 0; t < 30; ++t) col1[t] = p.probabilities[0](t, 1);
        CHECK(roc_auc_macro_ovr(p.probabilities[0], p.labels) == roc_auc_binary(col1, p.labels));
    }
}

TEST_CASE("macro ovr auc averages present classes") {
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 3 + static_cast<int>(rng.index(3));
        const int n = 20 + static_cast<int>(rng.index(40));
        PredictionSet p = testutil::random_pool(rng, 1, n, k);
        std::vector<int> labels = p.labels;
        if (trial % 2 == 0) {
            // drop one class entirely; it must be skipped, not averaged in
            for (int& y : labels) {
                if (y == k - 1) y = k - 2;
            }
        }
        const Matrix& probs = p.probabilities[0];
        double sum = 0.0;
        int present = 0;
        for (int c = 0; c < k; ++c) {
            std::vector<int> ovr(n);
            bool any = false;
            for (int t = 0; t < n; ++t) {
                ovr[t] = labels[t] == c ? 1 : 0;
                any = any || ovr[t] == 1;
            }
            if (!any) continue;
            std::vector<double> col(n);
            for (int t = 0; t < n; ++t) col[t] = probs(t, c);
            sum += roc_auc_binary(col, ovr);
            ++present;
        }
        CHECK(roc_auc_macro_ovr(probs, labels) ==
              doctest::Approx(sum / present).epsilon(1e-12));
    }
}

TEST_CASE("macro ovr auc needs two present classes") {
    Matrix p = mat({{0.5, 0.3, 0.2}, {0.2, 0.5, 0.3}});
    CHECK_THROWS_AS(roc_auc_macro_ovr(p, std::vector<int>{1, 1}), Error);
}

TEST_CASE("balanced accuracy is the mean per-class recall") {
    // class 0: 2/3 right, class 1: 1/2 right -> (2/3 + 1/2) / 2
    const std::vector<int> pred{0, 0, 1, 1, 0};
    const std::vector<int> y{0, 0, 0, 1, 1};
    CHECK(balanced_accuracy(pred, y) == (2.0 / 3.0 + 0.5) / 2.0);

    SUBCASE("absent classes are skipped") {
        const std::vector<int> pred2{0, 2, 2};
        const std::vector<int> y2{0, 2, 2};  // class 1 never appears
        CHECK(balanced_accuracy(pred2, y2) == 1.0);
    }
    SUBCASE("oracle on random inputs") {
        Rng rng(77);
        for (int trial = 0; trial < 100; ++trial) {
            const int k = 2 + static_cast<int>(rng.index(4));
            const int n = 5 + static_cast<int>(rng.index(50));
            std::vector<int> a(n), b(n);
            for (int i = 0; i < n; ++i) {
                a[i] = static_cast<int>(rng.index(k));
                b[i] = static_cast<int>(rng.index(k));
            }
            double sum = 0.0;
            int present = 0;
            for (int c = 0; c < k; ++c) {
                int tot = 0, hit = 0;
                for (int i = 0; i < n; ++i) {
                    if (b[i] != c) continue;
                    ++tot;
                    hit += a[i] == c ? 1 : 0;
                }
                if (tot == 0) continue;
                sum += static_cast<double>(hit) / tot;
                ++present;
            }
            CHECK(balanced_accuracy(a, b) == sum / present);
        }
    }
}

TEST_CASE("metric parse and names") {
    CHECK(Metric::parse("roc_auc").kind == MetricKind::roc_auc);
    CHECK(Metric::parse("balanced_accuracy").kind == MetricKind::balanced_accuracy);
    CHECK(Metric::parse("roc_auc").name() == "roc_auc");
    CHECK(Metric::parse("balanced_accuracy").name() == "balanced_accuracy");
    CHECK_THROWS_AS(Metric::parse("accuracy"), Error);
}

TEST_CASE("ensemble loss is one minus the score") {
    Rng rng(31);
    PredictionSet p = testutil::random_pool(rng, 3, 40, 2);
    const Metric metric = Metric::parse("roc_auc");
    const RepetitionVector r = reps({1, 2, 0});
    const double score = metric.score(ensemble_probabilities(p, r), p.labels);
    CHECK(ensemble_loss(p, r, metric) == 1.0 - score);

    SUBCASE("unlabelled split is an error") {
        p.labels.clear();
        CHECK_THROWS_AS(ensemble_loss(p, r, metric), Error);
    }
}

TEST_CASE("loss vectors are one minus the true class probability") {
    PredictionSet p = testutil::pool({mat({{0.9, 0.1}, {0.2, 0.8}}), mat({{0.6, 0.4}, {0.5, 0.5}})},
                                     {0, 1});
    const auto lv = loss_vectors(p);
    REQUIRE(lv.size() == 2);
    CHECK(lv[0] == std::vector<double>{1.0 - 0.9, 1.0 - 0.8});
    CHECK(lv[1] == std::vector<double>{1.0 - 0.6, 1.0 - 0.5});
}

TEST_CASE("loss evaluator audits counted calls only") {
    Rng rng(2);
    PredictionSet p = testutil::random_pool(rng, 2, 10, 2);
    LossEvaluator eval(p, Metric::parse("balanced_accuracy"));
    CHECK(eval.count() == 0);
    eval.loss(reps({1, 0}));
    eval.loss(reps({1, 1}));
    CHECK(eval.count() == 2);
    eval.loss_uncounted(reps({0, 1}));
    CHECK(eval.count() == 2);
    CHECK(eval.loss(reps({1, 0})) == eval.loss_uncounted(reps({1, 0})));
}
