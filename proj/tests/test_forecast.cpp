// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "taycast/forecast.hpp"
#include "taycast/rng.hpp"
#include "taycast/toy_model.hpp"

#include <cmath>
#include <numbers>

using namespace taycast;

namespace {

TaylorCache fold_scalar_history(const std::vector<double>& values, int order, int interval) {
    TaylorCache cache(order, interval);
    double t = static_cast<double>(values.size());
    for (double v : values) {
        cache.update(FeatureTensor::scalar(v), t);
        t -= 1.0;
    }
    return cache;
}

std::vector<FeatureTensor> scalar_history(const std::vector<double>& values) {
    std::vector<FeatureTensor> out;
    for (double v : values) out.push_back(FeatureTensor::scalar(v));
    return out;
}

} // namespace

TEST_CASE("slot ids round-trip and name themselves") {
    const SlotId slot{3, Submodule::mlp};
    CHECK(slot.index() == 11);
    CHECK(SlotId::from_index(11) == slot);
    CHECK(slot.name() == "l3.mlp");
    CHECK(SlotId{0, Submodule::self_attention}.name() == "l0.sa");
    CHECK(SlotId{2, Submodule::cross_attention}.name() == "l2.ca");
}

TEST_CASE("cache_update base case") {
    TaylorCache cache(2, 3);
    CHECK(cache.samples_seen() == 0);
    cache.update(FeatureTensor::scalar(7.0), 9.0);
    REQUIRE(cache.diffs().size() == 1);
    CHECK(cache.diffs()[0].data[0] == 7.0);
    CHECK(cache.samples_seen() == 1);
    CHECK(cache.anchor_t() == 9.0);
}

TEST_CASE("cache_update first difference") {
    // F(t+N)=9 then F(t)=4: delta^1 = 9 - 4 = 5
    TaylorCache cache = fold_scalar_history({9.0, 4.0}, 1, 5);
    REQUIRE(cache.diffs().size() == 2);
    CHECK(cache.diffs()[0].data[0] == 4.0);
    CHECK(cache.diffs()[1].data[0] == 5.0);
}

TEST_CASE("cache_update second difference") {
    // 9, 4, 1 at t+2N, t+N, t: delta^2 = 9 - 2*4 + 1 = 2
    TaylorCache cache = fold_scalar_history({9.0, 4.0, 1.0}, 2, 2);
    REQUIRE(cache.diffs().size() == 3);
    CHECK(cache.diffs()[0].data[0] == 1.0);
    CHECK(cache.diffs()[1].data[0] == 3.0);
    CHECK(cache.diffs()[2].data[0] == 2.0);
}

TEST_CASE("cache_update rejects corruption") {
    TaylorCache cache(1, 2);
    cache.update(FeatureTensor::scalar(1.0), 4.0);
    CHECK_THROWS_WITH_AS(cache.update(FeatureTensor::scalar(2.0), 4.0),
                         doctest::Contains("schedule corruption"), std::invalid_argument);
    CHECK_THROWS_AS(cache.update(FeatureTensor::scalar(2.0), 5.0), std::invalid_argument);
    CHECK_THROWS_AS(cache.update(FeatureTensor::zeros({2}), 3.0), std::invalid_argument);
}

TEST_CASE("cache keeps at most order+1 differences") {
    TaylorCache cache(1, 1);
    double t = 10.0;
    for (double v : {5.0, 6.0, 9.0, 14.0}) {
        cache.update(FeatureTensor::scalar(v), t);
        t -= 1.0;
    }
    CHECK(cache.diffs().size() == 2);
    CHECK(cache.samples_seen() == 4);
}

TEST_CASE("binomial_difference examples") {
    SUBCASE("order zero is identity") {
        auto h = scalar_history({42.0});
        CHECK(binomial_difference(h, 0).data[0] == 42.0);
    }
    SUBCASE("order one") {
        auto h = scalar_history({9.0, 4.0});
        CHECK(binomial_difference(h, 1).data[0] == 5.0);
    }
    SUBCASE("order two") {
        auto h = scalar_history({9.0, 4.0, 1.0});
        CHECK(binomial_difference(h, 2).data[0] == 2.0);
    }
    SUBCASE("order beyond history is rejected") {
        auto h = scalar_history({1.0, 2.0});
        CHECK_THROWS_AS((void)binomial_difference(h, 2), std::invalid_argument);
    }
}

TEST_CASE("incremental differences equal the binomial form") {
    // Dual-route check: folding update() must reproduce the direct
    // binomial evaluation for every order, on tensor-valued histories.
    Xoshiro256ss rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const int len = 2 + static_cast<int>(rng.next() % 5); // 2..6
        std::vector<FeatureTensor> history;
        for (int i = 0; i < len; ++i) {
            FeatureTensor f = FeatureTensor::zeros({3});
            for (auto& v : f.data) v = rng.normal();
            history.push_back(std::move(f));
        }

        TaylorCache cache(kMaxOrder, 1);
        double t = static_cast<double>(len);
        for (const auto& f : history) cache.update(f, t--);

        for (int i = 0; i < len; ++i) {
            const FeatureTensor direct = binomial_difference(history, i);
            const FeatureTensor& incremental = cache.diffs()[static_cast<std::size_t>(i)];
            for (std::size_t c = 0; c < direct.size(); ++c) {
                const double scale = std::max({std::abs(direct.data[c]), std::abs(incremental.data[c]), 1.0});
                CHECK(std::abs(direct.data[c] - incremental.data[c]) <= 1e-12 * scale);
            }
        }
    }
}

TEST_CASE("predict at order zero reuses the anchor bitwise") {
    Xoshiro256ss rng(11);
    TaylorCache cache(0, 4);
    FeatureTensor f = FeatureTensor::zeros({5});
    for (auto& v : f.data) v = rng.normal();
    cache.update(f, 2.0);
    for (int k : {0, 1, 3, 9}) {
        CHECK(cache.predict(k).data == f.data);
    }
}

TEST_CASE("predict reproduces a quadratic exactly") {
    // F(t) = t^2 sampled at t = 6, 4, 2 with N = 2; the anchor is t = 2 and
    // the target t = 1, so the exact value is 1.
    TaylorCache cache(2, 2);
    cache.update(FeatureTensor::scalar(36.0), 6.0);
    cache.update(FeatureTensor::scalar(16.0), 4.0);
    cache.update(FeatureTensor::scalar(4.0), 2.0);
    const double predicted = cache.predict(1).data[0];
    CHECK(predicted == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("predict linear case agrees with the two-point formula") {
    // diffs [4, 5] (from 9 then 4), N=5, k=2: the linear extrapolation
    // F(t) + (F(t) - F(t+N)) * k/N continues the downward trend to 2.
    TaylorCache cache = fold_scalar_history({9.0, 4.0}, 1, 5);
    const double predicted = cache.predict(2).data[0];
    const double linear = 4.0 + (4.0 - 9.0) * (2.0 / 5.0);
    CHECK(predicted == linear);
    CHECK(predicted == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("predict at effective order one is bitwise the linear formula") {
    Xoshiro256ss rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng.next() % 6);
        const int k = 1 + static_cast<int>(rng.next() % n);
        FeatureTensor older = FeatureTensor::zeros({4});
        FeatureTensor newer = FeatureTensor::zeros({4});
        for (auto& v : older.data) v = rng.normal();
        for (auto& v : newer.data) v = rng.normal();

        TaylorCache cache(1, n);
        cache.update(older, 2.0 * n);
        cache.update(newer, 1.0 * n);
        const FeatureTensor predicted = cache.predict(k);

        const double ratio = static_cast<double>(k) / static_cast<double>(n);
        for (std::size_t c = 0; c < predicted.size(); ++c) {
            const double linear = newer.data[c] + (newer.data[c] - older.data[c]) * ratio;
            CHECK(predicted.data[c] == linear);
        }
    }
}

TEST_CASE("predict at k=0 returns the anchor") {
    Xoshiro256ss rng(31);
    TaylorCache cache(3, 3);
    FeatureTensor last;
    double t = 12.0;
    for (int i = 0; i < 4; ++i) {
        last = FeatureTensor::zeros({6});
        for (auto& v : last.data) v = rng.normal();
        cache.update(last, t);
        t -= 3.0;
    }
    CHECK(cache.predict(0).data == last.data);
}

TEST_CASE("predict before any activation fails") {
    TaylorCache cache(2, 3);
    CHECK_THROWS_WITH_AS((void)cache.predict(1),
                         doctest::Contains("predict before any full activation"), std::logic_error);
}

TEST_CASE("predict rejects negative offsets") {
    TaylorCache cache(1, 3);
    cache.update(FeatureTensor::scalar(1.0), 1.0);
    CHECK_THROWS_AS((void)cache.predict(-1), std::invalid_argument);
}

TEST_CASE("warmup truncates the effective order") {
    TaylorCache cache(3, 2);
    CHECK(cache.effective_order() == 0);
    cache.update(FeatureTensor::scalar(1.0), 8.0);
    CHECK(cache.effective_order() == 0);
    cache.update(FeatureTensor::scalar(2.0), 6.0);
    CHECK(cache.effective_order() == 1);
    cache.update(FeatureTensor::scalar(3.0), 4.0);
    CHECK(cache.effective_order() == 2);
    cache.update(FeatureTensor::scalar(4.0), 2.0);
    CHECK(cache.effective_order() == 3);
    cache.update(FeatureTensor::scalar(5.0), 1.0);
    CHECK(cache.effective_order() == 3);

    TaylorCache saturated(2, 1);
    double t = 20.0;
    for (int i = 0; i < 10; ++i) saturated.update(FeatureTensor::scalar(i), t--);
    CHECK(saturated.effective_order() == 2);
}

TEST_CASE("polynomial trajectories are reproduced exactly") {
    Xoshiro256ss rng(47);
    for (int degree = 0; degree <= 4; ++degree) {
        for (int n = 2; n <= 7; ++n) {
            // random polynomial per component, coefficients in [-2, 2]
            std::vector<std::vector<double>> coeffs(3);
            for (auto& cs : coeffs) {
                cs.resize(static_cast<std::size_t>(degree) + 1);
                for (auto& c : cs) c = 4.0 * rng.uniform01() - 2.0;
            }
            const auto traj = AnalyticTrajectory::polynomial({3}, coeffs);

            const int m = degree;
            const double anchor = 1.0 + 8.0 * rng.uniform01();
            TaylorCache cache(m, n);
            for (int j = m; j >= 0; --j) {
                const double t = anchor + static_cast<double>(j * n);
                cache.update(analytic_eval(traj, t, 0), t);
            }
            for (int k = 1; k < n; ++k) {
                const FeatureTensor predicted = cache.predict(k);
                const FeatureTensor truth = analytic_eval(traj, anchor - k, 0);
                for (std::size_t c = 0; c < truth.size(); ++c) {
                    const double scale = std::max(std::abs(truth.data[c]), 1.0);
                    CHECK(std::abs(predicted.data[c] - truth.data[c]) <= 1e-9 * scale);
                }
            }
        }
    }
}

TEST_CASE("difference-over-interval converges to the derivative") {
    // delta^i F / N^i -> F^(i) as N -> 0 for F = sin. First-order
    // convergence predicts a 10x error drop per decade of N; the measured
    // supremum of the worst-order ratio over all anchors is 10*(1 - N^2/4),
    // so the assertion uses 9.9.
    const double t0 = 0.0;
    auto difference_error = [&](double h, int i) {
        std::vector<FeatureTensor> history;
        for (int j = i; j >= 0; --j) {
            history.push_back(FeatureTensor::scalar(std::sin(t0 + j * h)));
        }
        const double est = binomial_difference(history, i).data[0] / std::pow(h, i);
        const double exact = std::sin(t0 + i * std::numbers::pi / 2.0);
        return std::abs(est - exact);
    };
    for (int i = 1; i <= 3; ++i) {
        const double coarse = difference_error(0.1, i);
        const double fine = difference_error(0.01, i);
        const double finest = difference_error(0.001, i);
        CHECK(fine < coarse);
        CHECK(finest < fine);
        CHECK(fine <= coarse / 9.9);
    }
}

TEST_CASE("prediction coefficients follow the pinned recurrence") {
    const auto c = prediction_coefficients(0.5, 3);
    REQUIRE(c.size() == 3);
    CHECK(c[0] == -0.5);
    CHECK(c[1] == doctest::Approx(0.375).epsilon(1e-15));        // -0.5 * -(1.5)/2
    CHECK(c[2] == doctest::Approx(-0.3125).epsilon(1e-15));      // 0.375 * -(2.5)/3
    CHECK(prediction_coefficients(0.0, 2)[0] == 0.0);
}

TEST_CASE("cache construction validates order and interval") {
    CHECK_THROWS_AS(TaylorCache(-1, 1), std::invalid_argument);
    CHECK_THROWS_AS(TaylorCache(kMaxOrder + 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(TaylorCache(2, 0), std::invalid_argument);
    CHECK(exact_factorial(5) == 120.0);
    CHECK(exact_binomial(6, 3) == 20.0);
    CHECK_THROWS_AS((void)exact_factorial(kMaxTableOrder + 1), std::invalid_argument);
}
