// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "taycast/toy_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

using namespace taycast;

TEST_CASE("analytic polynomial evaluation") {
    const auto constant = AnalyticTrajectory::polynomial({2}, {{1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}});
    const FeatureTensor d1 = analytic_eval(constant, 3.7, 1);
    CHECK(d1.data == std::vector<double>{0.0, 0.0});

    const auto square = AnalyticTrajectory::polynomial({1}, {{0.0, 0.0, 1.0}});
    CHECK(analytic_eval(square, 3.0, 0).data[0] == doctest::Approx(9.0));
    CHECK(analytic_eval(square, 3.0, 1).data[0] == doctest::Approx(6.0));
    CHECK(analytic_eval(square, 3.0, 2).data[0] == doctest::Approx(2.0));
    CHECK(analytic_eval(square, 3.0, 3).data[0] == 0.0);
}

TEST_CASE("analytic sinusoid evaluation") {
    const auto sine = AnalyticTrajectory::sinusoid({2}, {1.0, 1.0}, {1.0, 1.0}, {0.0, 0.0});
    const FeatureTensor d1 = analytic_eval(sine, 0.0, 1);
    CHECK(d1.data[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(d1.data[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(analytic_eval(sine, 0.0, 2).data[0] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("denoiser invokes hooks for every slot in execution order") {
    const ToyDenoiser model(42);
    const FeatureTensor x = FeatureTensor::zeros({16, 64});
    std::vector<int> seen;
    model.forward(x, 1.0, [&](SlotId slot, const FeatureTensor& y) {
        seen.push_back(slot.index());
        CHECK(y.shape == x.shape);
    });
    REQUIRE(seen.size() == static_cast<std::size_t>(3 * model.dims().layers));
    for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == static_cast<int>(i));
}

TEST_CASE("denoiser is deterministic") {
    const ToyDenoiser a(42);
    const ToyDenoiser b(42);
    FeatureTensor x = FeatureTensor::zeros({16, 64});
    for (std::size_t i = 0; i < x.size(); ++i) x.data[i] = std::sin(0.1 * static_cast<double>(i));
    const FeatureTensor ya = a.forward(x, 0.7);
    const FeatureTensor yb = b.forward(x, 0.7);
    CHECK(ya.data == yb.data);

    const ToyDenoiser c(43);
    CHECK(c.forward(x, 0.7).data != ya.data);
}

TEST_CASE("denoiser matches the frozen reference output") {
    // seed 42, zero input, t = 1.0; file written by the run that froze the
    // format, compared bitwise through the 17-digit round trip.
    const ToyDenoiser model(42);
    const FeatureTensor y = model.forward(FeatureTensor::zeros({16, 64}), 1.0);

    std::ifstream in(std::string(TAYCAST_TEST_DATA_DIR) + "/denoiser_seed42_zero_t1.txt");
    REQUIRE(in.good());
    std::size_t count = 0;
    double expected = 0.0;
    while (in >> expected) {
        REQUIRE(count < y.size());
        CHECK(y.data[count] == expected);
        ++count;
    }
    CHECK(count == y.size());
}

TEST_CASE("denoiser rejects wrong input shape") {
    const ToyDenoiser model(42);
    CHECK_THROWS_AS((void)model.forward(FeatureTensor::zeros({4, 4}), 1.0), std::invalid_argument);
}

TEST_CASE("all-full sampling equals the plain loop") {
    const ToyDenoiser model(42);
    SamplerConfig config;
    config.total_steps = 20;

    CacheSet caches(model.dims().layers, 0, 1);
    const SampleResult accelerated =
        sample(config, model, ActivationSchedule::uniform(20, 1, 0), caches);

    FeatureTensor x = initial_state(config, model.dims());
    const double dt = 1.0 / config.total_steps;
    for (int i = 0; i < config.total_steps; ++i) {
        const double t = 1.0 - static_cast<double>(i) / config.total_steps;
        const FeatureTensor d = model.forward(x, t);
        for (std::size_t j = 0; j < x.size(); ++j) {
            x.data[j] -= config.sigma_max * t * (x.data[j] - d.data[j]) * dt;
        }
    }
    CHECK(accelerated.final_state.data == x.data);
}

TEST_CASE("sampling is deterministic and higher order diverges less") {
    const ToyDenoiser model(42);
    SamplerConfig config;

    auto run = [&](int n, int order) {
        CacheSet caches(model.dims().layers, order, n);
        return sample(config, model, ActivationSchedule::uniform(50, n, 0), caches).final_state;
    };

    const FeatureTensor base = run(1, 0);
    const FeatureTensor repeat = run(1, 0);
    CHECK(base.data == repeat.data);

    const double div0 = l2_distance(run(3, 0), base);
    const double div2 = l2_distance(run(3, 2), base);
    CHECK(div2 < div0);
    CHECK(div0 > 0.0);
}

TEST_CASE("full step count matches the schedule") {
    const ToyDenoiser model(42);
    SamplerConfig config;
    CacheSet caches(model.dims().layers, 1, 5);
    const SampleResult r = sample(config, model, ActivationSchedule::uniform(50, 5, 0), caches);
    CHECK(r.full_steps == 10);
}

TEST_CASE("sampler rejects inconsistent configuration") {
    const ToyDenoiser model(42);
    SamplerConfig config;
    config.total_steps = 10;

    CacheSet wrong_steps(model.dims().layers, 0, 1);
    CHECK_THROWS_AS(
        (void)sample(config, model, ActivationSchedule::uniform(20, 1, 0), wrong_steps),
        std::invalid_argument);

    CacheSet wrong_interval(model.dims().layers, 0, 3);
    CHECK_THROWS_AS(
        (void)sample(config, model, ActivationSchedule::uniform(10, 2, 0), wrong_interval),
        std::invalid_argument);

    CacheSet wrong_slots(model.dims().layers + 1, 0, 1);
    CHECK_THROWS_AS(
        (void)sample(config, model, ActivationSchedule::uniform(10, 1, 0), wrong_slots),
        std::invalid_argument);
}

TEST_CASE("diagnostic mode reports per-slot errors for predicted steps") {
    const ToyDenoiser model(42);
    SamplerConfig config;
    config.total_steps = 9;
    CacheSet caches(model.dims().layers, 1, 3);
    SampleOptions options;
    options.diagnostic = true;
    const SampleResult r =
        sample(config, model, ActivationSchedule::uniform(9, 3, 0), caches, options);
    REQUIRE(r.diagnostics.size() == 6); // 9 steps, 3 full
    for (const auto& e : r.diagnostics) {
        CHECK(e.errors.size() == static_cast<std::size_t>(model.slot_count()));
        CHECK(e.offset >= 1);
        for (double v : e.errors) CHECK(std::isfinite(v));
    }
}

TEST_CASE("recorded trajectories are smooth, not white noise") {
    // On the default model every slot's feature path moves by a finite step
    // each iteration and consecutive changes point the same way: positive
    // lag-1 autocorrelation of the first differences.
    const ToyDenoiser model(42);
    SamplerConfig config;
    CacheSet caches(model.dims().layers, 0, 1);
    SampleOptions options;
    options.record = true;
    const SampleResult r =
        sample(config, model, ActivationSchedule::uniform(50, 1, 0), caches, options);

    REQUIRE(r.features.size() == static_cast<std::size_t>(model.slot_count()));
    for (const auto& path : r.features) {
        REQUIRE(path.size() == 50);
        double mean_step = 0.0;
        std::vector<FeatureTensor> deltas;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            deltas.push_back(axpy(-1.0, path[i], path[i + 1]));
            mean_step += l2_distance(path[i + 1], path[i]);
        }
        mean_step /= static_cast<double>(deltas.size());
        CHECK(std::isfinite(mean_step));
        CHECK(mean_step > 0.0);

        double cross = 0.0;
        double norm = 0.0;
        for (std::size_t i = 0; i + 1 < deltas.size(); ++i) {
            for (std::size_t c = 0; c < deltas[i].size(); ++c) {
                cross += deltas[i].data[c] * deltas[i + 1].data[c];
            }
        }
        for (const auto& d : deltas) {
            for (double v : d.data) norm += v * v;
        }
        CHECK(cross / norm > 0.0);
    }
}

TEST_CASE("initial state stream is separated from the weight stream") {
    SamplerConfig config;
    config.seed = 42;
    const FeatureTensor a = initial_state(config, DenoiserDims{});
    const FeatureTensor b = initial_state(config, DenoiserDims{});
    CHECK(a.data == b.data);

    config.seed = 43;
    CHECK(initial_state(config, DenoiserDims{}).data != a.data);
}
