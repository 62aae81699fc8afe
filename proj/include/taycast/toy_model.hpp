// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "taycast/forecast.hpp"
#include "taycast/schedule.hpp"
#include "taycast/tensor.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace taycast {

/// Trajectory with closed-form derivatives of every order, used as the
/// exact reference when checking difference and prediction behavior.
struct AnalyticTrajectory {
    enum class Kind { polynomial, sinusoid };

    Kind kind = Kind::polynomial;
    std::vector<std::size_t> shape;

    /// polynomial: coeffs[c] holds ascending-degree coefficients of
    /// component c, value = sum_j coeffs[c][j] * t^j.
    std::vector<std::vector<double>> coeffs;

    /// sinusoid: component c is amplitude[c] * sin(frequency[c] * t + phase[c]).
    std::vector<double> amplitude;
    std::vector<double> frequency;
    std::vector<double> phase;

    static AnalyticTrajectory polynomial(std::vector<std::size_t> shape,
                                         std::vector<std::vector<double>> coeffs);
    static AnalyticTrajectory sinusoid(std::vector<std::size_t> shape,
                                       std::vector<double> amplitude,
                                       std::vector<double> frequency,
                                       std::vector<double> phase);
};

/// Exact value of the derivative_order-th derivative at t.
FeatureTensor analytic_eval(const AnalyticTrajectory& traj, double t, int derivative_order);

struct DenoiserDims {
    int layers = 8;
    int tokens = 16;
    int channels = 64;
    int hidden = 256;

    bool operator==(const DenoiserDims&) const = default;
};

/// Seeded transformer-shaped denoiser: L blocks of self-attention,
/// cross-attention against a fixed seeded context, and a two-layer tanh MLP,
/// each wrapped as h + s_l * f(h) with a per-layer fixed scale. All weights
/// come from xoshiro256** in a pinned draw order (see the .cpp), so identical
/// seeds give bitwise-identical outputs and intermediate features.
class ToyDenoiser {
public:
    using Hook = std::function<void(SlotId, const FeatureTensor&)>;
    using SlotProducer = std::function<FeatureTensor(SlotId)>;

    explicit ToyDenoiser(std::uint64_t seed, DenoiserDims dims = {});

    /// Full forward pass. Invokes hook with every submodule contribution
    /// (post-scale, pre-residual) in execution order: 3 * layers calls.
    FeatureTensor forward(const FeatureTensor& x, double t, const Hook& hook = {}) const;

    /// Forward pass with every submodule contribution replaced by the
    /// producer's tensor; residual adds and inter-layer wiring still apply.
    FeatureTensor forward_with(const FeatureTensor& x, double t, const SlotProducer& producer) const;

    /// Smooth conditioning signal added to every token row before layer 0:
    /// emb[c] = u^3 * cos(w_c * u) with u = 1 - t and w_c geometric in
    /// [1, 6]. The cubic envelope holds feature velocity near zero across
    /// the first activation gaps, where caches are still warming up.
    std::vector<double> time_embedding(double t) const;

    const DenoiserDims& dims() const { return dims_; }
    std::uint64_t seed() const { return seed_; }
    int slot_count() const { return dims_.layers * 3; }

private:
    struct LayerWeights {
        std::vector<double> sa_q, sa_k, sa_v, sa_o;
        std::vector<double> ca_q, ca_k, ca_v, ca_o;
        std::vector<double> mlp_in, mlp_out;
        double scale = 1.0;
    };

    FeatureTensor run(const FeatureTensor& x, double t, const Hook& hook,
                      const SlotProducer& producer) const;

    std::uint64_t seed_;
    DenoiserDims dims_;
    std::vector<double> context_; // tokens x channels
    std::vector<LayerWeights> layers_;
};

struct SamplerConfig {
    int total_steps = 50;
    std::uint64_t seed = 42;
    double sigma_max = 1.0; // sigma(t) = sigma_max * t, linearly decreasing
};

/// Seeded Gaussian initial state for the sampler, drawn from a stream
/// separated from the weight stream so state and context never coincide.
FeatureTensor initial_state(const SamplerConfig& config, const DenoiserDims& dims);

struct StepErrors {
    int step = 0;
    int offset = 0;
    std::vector<double> errors; // per slot, l2 against the shadow computation
};

struct SampleOptions {
    bool diagnostic = false; // shadow-compute predicted steps and record per-slot errors
    bool record = false;     // capture every slot feature at every step
};

struct SampleResult {
    FeatureTensor final_state;
    int full_steps = 0;
    std::vector<StepErrors> diagnostics;

    // populated when options.record is set; features[slot][step]
    std::vector<double> timesteps;
    std::vector<std::vector<FeatureTensor>> features;
};

/// Run the deterministic sampler: x <- x - sigma(t) * (x - D(x, t)) * dt.
/// FULL steps refresh every cache; PREDICT steps extrapolate each slot at
/// the scheduled offset. Pure function of (config, model seed, schedule,
/// cache configuration).
SampleResult sample(const SamplerConfig& config, const ToyDenoiser& model,
                    const ActivationSchedule& schedule, CacheSet& caches,
                    const SampleOptions& options = {});

} // namespace taycast
