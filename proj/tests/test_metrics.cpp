// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "klmat/errors.hpp"
#include "klmat/metrics.hpp"
#include "support/oracles.hpp"

using namespace klmat;

namespace {

PopularityDistribution dist(std::vector<double> probs) {
    PopularityDistribution d;
    d.probs = std::move(probs);
    d.validate();
    return d;
}

}  // namespace

TEST_CASE("mae: perfect predictions and a hand value") {
    // single user/item with cos = 1 -> prediction r_max = rating
    FactorModel m;
    m.factors = 2;
    m.U = Matrix(1, 2);
    m.V = Matrix(1, 2);
    m.U(0, 0) = 1.0; m.U(0, 1) = 1.0;
    m.V(0, 0) = 2.0; m.V(0, 1) = 2.0;

    RatingsDataset test = dataset_from_triplets({1}, {1}, {5.0});
    ObservedMask mask = ObservedMask::from(test, 1, 1);
    CHECK(mae(m, test, mask).value == doctest::Approx(0.0));

    // cos(U0, V0) = 0.7 -> prediction 3.5 vs rating 4.0 gives error 0.5;
    // cos(U0, V1) = 1.0 -> prediction 5.0 vs rating 5.0 gives error 0.
    FactorModel tilted;
    tilted.factors = 2;
    tilted.U = Matrix(1, 2);
    tilted.U(0, 0) = 0.7; tilted.U(0, 1) = std::sqrt(1.0 - 0.49);
    tilted.V = Matrix(2, 2);
    tilted.V(0, 0) = 1.0; tilted.V(0, 1) = 0.0;
    tilted.V(1, 0) = 0.7; tilted.V(1, 1) = std::sqrt(1.0 - 0.49);

    RatingsDataset test2 = dataset_from_triplets({1, 1}, {1, 2}, {4.0, 5.0});
    ObservedMask mask2 = ObservedMask::from(test2, 1, 2);
    MaeResult r = mae(tilted, test2, mask2);
    CHECK(r.value == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(r.skipped_cold_start == 0);
}

TEST_CASE("mae matches a naive loop and is shuffle-invariant") {
    std::mt19937_64 rng(157);
    RatingsDataset ds = testing::random_dataset(rng, 15, 20, 200);
    FactorModel m = testing::random_model(rng, 15, 20, 4);
    ObservedMask mask = ObservedMask::from(ds, 15, 20);

    double naive = 0.0;
    for (const Rating& t : ds.triplets) {
        double cosine = testing::naive_cosine(m.U.row(static_cast<std::size_t>(t.user)),
                                              m.V.row(static_cast<std::size_t>(t.item)));
        double prediction = std::clamp(ds.r_max * cosine, 0.0, ds.r_max);
        naive += std::abs(t.value - prediction);
    }
    naive /= static_cast<double>(ds.triplets.size());
    CHECK(mae(m, ds, mask).value == doctest::Approx(naive).epsilon(1e-12));

    RatingsDataset shuffled = ds;
    deterministic_shuffle(shuffled.triplets, rng);
    CHECK(mae(m, shuffled, mask).value == doctest::Approx(mae(m, ds, mask).value).epsilon(1e-12));
}

TEST_CASE("mae skips cold-start triplets and errors when nothing is evaluable") {
    std::mt19937_64 rng(163);
    FactorModel m = testing::random_model(rng, 3, 3, 2);
    RatingsDataset test = dataset_from_triplets({1, 2, 3}, {1, 2, 3}, {4.0, 3.0, 2.0});

    ObservedMask mask;
    mask.user_seen = {1, 1, 0};  // user index 2 unseen in training
    mask.item_seen = {1, 0, 1};  // item index 1 unseen in training
    MaeResult r = mae(m, test, mask);
    CHECK(r.skipped_cold_start == 2);

    ObservedMask none;
    none.user_seen = {0, 0, 0};
    none.item_seen = {0, 0, 0};
    CHECK_THROWS_AS(mae(m, test, none), EmptyEvaluationError);
}

TEST_CASE("mae raw-dot mode uses the unscaled dot product") {
    FactorModel m;
    m.factors = 2;
    m.U = Matrix(1, 2);
    m.V = Matrix(1, 2);
    m.U(0, 0) = 1.0; m.U(0, 1) = 2.0;
    m.V(0, 0) = 3.0; m.V(0, 1) = 0.5;  // dot = 4
    RatingsDataset test = dataset_from_triplets({1}, {1}, {5.0});
    ObservedMask mask = ObservedMask::from(test, 1, 1);
    CHECK(mae(m, test, mask, MaeMode::raw_dot).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kl_divergence: hand values") {
    CHECK(kl_divergence(dist({0.5, 0.5}), dist({0.5, 0.5})) == doctest::Approx(0.0));

    double expected = 0.5 * std::log(5.0 / 9.0) + 0.5 * std::log(5.0);
    CHECK(kl_divergence(dist({0.5, 0.5}), dist({0.9, 0.1})) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(0.51083).epsilon(1e-4));

    // p = (1, 0) vs uniform: 0 * ln(0/q) contributes nothing
    CHECK(kl_divergence(dist({1.0, 0.0}), dist({0.5, 0.5})) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("kl_divergence support and shape errors") {
    CHECK_THROWS_AS(kl_divergence(dist({0.5, 0.5}), dist({1.0, 0.0})), SupportError);
    CHECK_THROWS_AS(kl_divergence(dist({0.5, 0.5}), dist({1.0})), ConfigError);
}

TEST_CASE("kl_divergence axioms over random distribution pairs") {
    std::mt19937_64 rng(167);
    for (int trial = 0; trial < 10000; ++trial) {
        std::size_t bins = 2 + static_cast<std::size_t>(uniform01(rng) * 6);
        auto p = dist(testing::random_distribution(rng, bins));
        auto q = dist(testing::random_distribution(rng, bins));
        double d = kl_divergence(p, q);
        CHECK(d >= 0.0);
        CHECK(kl_divergence(p, p) == 0.0);

        bool equal = true;
        for (std::size_t i = 0; i < bins; ++i) {
            if (std::abs(p.probs[i] - q.probs[i]) > 1e-12) equal = false;
        }
        if (!equal) CHECK(d > 0.0);
    }
}

TEST_CASE("kl_divergence has an asymmetry witness") {
    auto p = dist({0.5, 0.5});
    auto q = dist({0.9, 0.1});
    CHECK(kl_divergence(p, q) != kl_divergence(q, p));
}

TEST_CASE("symmetric_kl: symmetry, hand value, zero at equality") {
    auto p = dist({0.5, 0.5});
    auto q = dist({0.9, 0.1});
    double forward = 0.5 * std::log(5.0 / 9.0) + 0.5 * std::log(5.0);
    double backward = 0.9 * std::log(9.0 / 5.0) + 0.1 * std::log(1.0 / 5.0);
    CHECK(symmetric_kl(p, q) == doctest::Approx(forward + backward).epsilon(1e-12));
    CHECK(symmetric_kl(p, p) == 0.0);

    std::mt19937_64 rng(173);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t bins = 2 + static_cast<std::size_t>(uniform01(rng) * 5);
        auto a = dist(testing::random_distribution(rng, bins));
        auto b = dist(testing::random_distribution(rng, bins));
        CHECK(symmetric_kl(a, b) == doctest::Approx(symmetric_kl(b, a)).epsilon(1e-15));
    }
}

TEST_CASE("degree_of_matthew: hand values and degeneracy") {
    std::vector<int> equal{1, 1, 1};
    CHECK_THROWS_AS(degree_of_matthew(equal), DegenerateEstimatorError);

    std::vector<int> ranks{1, 2, 4};
    double log_sum = std::log(0.25) + std::log(0.5) + std::log(1.0);
    double expected = 1.0 + 3.0 / log_sum;
    CHECK(degree_of_matthew(ranks) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(-0.44270).epsilon(1e-4));

    // min-reference mode: reference rank 1, positive log-sum, s > 1
    double min_log_sum = std::log(1.0) + std::log(2.0) + std::log(4.0);
    CHECK(degree_of_matthew(ranks, RankMode::min_reference) ==
          doctest::Approx(1.0 + 3.0 / min_log_sum).epsilon(1e-12));
}

TEST_CASE("degree_of_matthew matches a naive loop for 1..100") {
    std::vector<int> ranks(100);
    for (int i = 0; i < 100; ++i) ranks[static_cast<std::size_t>(i)] = i + 1;
    double naive = 0.0;
    for (int r : ranks) naive += std::log(r / 100.0);
    CHECK(degree_of_matthew(ranks) == doctest::Approx(1.0 + 100.0 / naive).epsilon(1e-12));
}

TEST_CASE("degree_of_matthew is invariant under rank relabeling") {
    std::mt19937_64 rng(179);
    std::vector<int> ranks{1, 3, 3, 7, 2, 9, 4};
    double reference = degree_of_matthew(ranks);
    for (int trial = 0; trial < 20; ++trial) {
        deterministic_shuffle(ranks, rng);
        CHECK(degree_of_matthew(ranks) == doctest::Approx(reference).epsilon(1e-12));
    }
    CHECK_THROWS_AS(degree_of_matthew(std::vector<int>{2, 0, 1}), ConfigError);
}

TEST_CASE("popularity_distribution_from_counts normalizes and validates") {
    std::vector<std::int64_t> even{1, 1, 1, 1};
    PopularityDistribution p = popularity_distribution_from_counts(even);
    for (double x : p.probs) CHECK(x == doctest::Approx(0.25));

    std::vector<std::int64_t> skew{3, 1};
    PopularityDistribution q = popularity_distribution_from_counts(skew);
    CHECK(q.probs[0] == doctest::Approx(0.75));
    CHECK(q.probs[1] == doctest::Approx(0.25));

    std::vector<std::int64_t> zeros{0, 0};
    CHECK_THROWS_AS(popularity_distribution_from_counts(zeros), EmptyEvaluationError);
    std::vector<std::int64_t> negatives{3, -1};
    CHECK_THROWS_AS(popularity_distribution_from_counts(negatives), ConfigError);

    std::mt19937_64 rng(181);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::int64_t> counts(5);
        for (auto& c : counts) c = static_cast<std::int64_t>(uniform01(rng) * 40);
        counts[0] += 1;
        PopularityDistribution d = popularity_distribution_from_counts(counts);
        double sum = 0.0;
        for (double x : d.probs) sum += x;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        d.validate();
    }
}

TEST_CASE("uniform_distribution is valid and uniform") {
    PopularityDistribution u = uniform_distribution(7);
    u.validate();
    for (double x : u.probs) CHECK(x == doctest::Approx(1.0 / 7.0));
    CHECK_THROWS_AS(uniform_distribution(0), ConfigError);
}
