// SPDX-License-Identifier: Apache-2.0

#include "taycast/toy_model.hpp"

#include "taycast/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace taycast {

AnalyticTrajectory AnalyticTrajectory::polynomial(std::vector<std::size_t> shape,
                                                  std::vector<std::vector<double>> coeffs) {
    const std::size_t n = shape_element_count(shape);
    if (coeffs.size() != n) {
        throw std::invalid_argument("AnalyticTrajectory::polynomial: " + std::to_string(coeffs.size()) +
                                    " coefficient lists for " + std::to_string(n) + " components");
    }
    AnalyticTrajectory t;
    t.kind = Kind::polynomial;
    t.shape = std::move(shape);
    t.coeffs = std::move(coeffs);
    return t;
}

AnalyticTrajectory AnalyticTrajectory::sinusoid(std::vector<std::size_t> shape,
                                                std::vector<double> amplitude,
                                                std::vector<double> frequency,
                                                std::vector<double> phase) {
    const std::size_t n = shape_element_count(shape);
    if (amplitude.size() != n || frequency.size() != n || phase.size() != n) {
        throw std::invalid_argument("AnalyticTrajectory::sinusoid: parameter lists must match component count " +
                                    std::to_string(n));
    }
    AnalyticTrajectory t;
    t.kind = Kind::sinusoid;
    t.shape = std::move(shape);
    t.amplitude = std::move(amplitude);
    t.frequency = std::move(frequency);
    t.phase = std::move(phase);
    return t;
}

FeatureTensor analytic_eval(const AnalyticTrajectory& traj, double t, int derivative_order) {
    if (derivative_order < 0) {
        throw std::invalid_argument("analytic_eval: negative derivative order");
    }
    FeatureTensor out = FeatureTensor::zeros(traj.shape);
    const std::size_t n = out.size();
    if (traj.kind == AnalyticTrajectory::Kind::polynomial) {
        for (std::size_t c = 0; c < n; ++c) {
            const auto& cs = traj.coeffs[c];
            double acc = 0.0;
            // d^o/dt^o t^j = j!/(j-o)! * t^(j-o)
            for (std::size_t j = cs.size(); j-- > 0;) {
                const int deg = static_cast<int>(j);
                if (deg < derivative_order) break;
                double factor = cs[j];
                for (int r = 0; r < derivative_order; ++r) factor *= static_cast<double>(deg - r);
                acc += factor * std::pow(t, static_cast<double>(deg - derivative_order));
            }
            out.data[c] = acc;
        }
    } else {
        // d^o/dt^o A sin(wt + p) = A w^o sin(wt + p + o*pi/2)
        for (std::size_t c = 0; c < n; ++c) {
            const double w = traj.frequency[c];
            const double shift = static_cast<double>(derivative_order) * std::numbers::pi / 2.0;
            out.data[c] = traj.amplitude[c] * std::pow(w, static_cast<double>(derivative_order)) *
                          std::sin(w * t + traj.phase[c] + shift);
        }
    }
    return out;
}

namespace {

constexpr double kEmbedFreqMin = 1.0;
constexpr double kEmbedFreqMax = 6.0;
constexpr std::uint64_t kStateStreamTag = 0x53414d504c455253ULL; // domain separation for the sampler stream

// out[r][c] = sum_k a[r][k] * w[k][c]
std::vector<double> matmul(const std::vector<double>& a, int rows, int inner,
                           const std::vector<double>& w, int cols) {
    std::vector<double> out(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0);
    for (int r = 0; r < rows; ++r) {
        const double* arow = a.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(inner);
        double* orow = out.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols);
        for (int k = 0; k < inner; ++k) {
            const double av = arow[k];
            const double* wrow = w.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(cols);
            for (int c = 0; c < cols; ++c) orow[c] += av * wrow[c];
        }
    }
    return out;
}

void softmax_rows(std::vector<double>& scores, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        double* row = scores.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(cols);
        double mx = row[0];
        for (int c = 1; c < cols; ++c) mx = std::max(mx, row[c]);
        double sum = 0.0;
        for (int c = 0; c < cols; ++c) {
            row[c] = std::exp(row[c] - mx);
            sum += row[c];
        }
        for (int c = 0; c < cols; ++c) row[c] /= sum;
    }
}

// Single-head attention of queries against (keys, values) drawn from kv.
std::vector<double> attention(const std::vector<double>& q_src, int q_rows,
                              const std::vector<double>& kv_src, int kv_rows, int channels,
                              const std::vector<double>& wq, const std::vector<double>& wk,
                              const std::vector<double>& wv, const std::vector<double>& wo) {
    const std::vector<double> q = matmul(q_src, q_rows, channels, wq, channels);
    const std::vector<double> k = matmul(kv_src, kv_rows, channels, wk, channels);
    const std::vector<double> v = matmul(kv_src, kv_rows, channels, wv, channels);

    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(channels));
    std::vector<double> scores(static_cast<std::size_t>(q_rows) * static_cast<std::size_t>(kv_rows));
    for (int r = 0; r < q_rows; ++r) {
        for (int c = 0; c < kv_rows; ++c) {
            double dot = 0.0;
            for (int d = 0; d < channels; ++d) {
                dot += q[static_cast<std::size_t>(r) * channels + d] *
                       k[static_cast<std::size_t>(c) * channels + d];
            }
            scores[static_cast<std::size_t>(r) * kv_rows + c] = dot * inv_sqrt;
        }
    }
    softmax_rows(scores, q_rows, kv_rows);
    const std::vector<double> mixed = matmul(scores, q_rows, kv_rows, v, channels);
    return matmul(mixed, q_rows, channels, wo, channels);
}

} // namespace

// Weight draw order (one normal per element, row-major; each normal consumes
// two raw xoshiro draws): context, then per layer sa_q, sa_k, sa_v, sa_o,
// ca_q, ca_k, ca_v, ca_o, mlp_in, mlp_out, scale. Weight std is
// 0.2/sqrt(channels); the per-layer residual scale is uniform in [0.75, 1.25].
ToyDenoiser::ToyDenoiser(std::uint64_t seed, DenoiserDims dims) : seed_(seed), dims_(dims) {
    if (dims.layers < 1 || dims.tokens < 1 || dims.channels < 2 || dims.hidden < 1) {
        throw std::invalid_argument("ToyDenoiser: invalid dimensions");
    }
    Xoshiro256ss rng(seed);
    const double std_w = 0.2 / std::sqrt(static_cast<double>(dims.channels));

    auto draw = [&rng](std::size_t n, double scale) {
        std::vector<double> out(n);
        for (auto& v : out) v = scale * rng.normal();
        return out;
    };

    const auto c = static_cast<std::size_t>(dims.channels);
    const auto tk = static_cast<std::size_t>(dims.tokens);
    const auto h = static_cast<std::size_t>(dims.hidden);

    context_ = draw(tk * c, 1.0);
    layers_.reserve(static_cast<std::size_t>(dims.layers));
    for (int l = 0; l < dims.layers; ++l) {
        LayerWeights w;
        w.sa_q = draw(c * c, std_w);
        w.sa_k = draw(c * c, std_w);
        w.sa_v = draw(c * c, std_w);
        w.sa_o = draw(c * c, std_w);
        w.ca_q = draw(c * c, std_w);
        w.ca_k = draw(c * c, std_w);
        w.ca_v = draw(c * c, std_w);
        w.ca_o = draw(c * c, std_w);
        w.mlp_in = draw(c * h, std_w);
        w.mlp_out = draw(h * c, std_w);
        w.scale = 0.75 + 0.5 * rng.uniform01();
        layers_.push_back(std::move(w));
    }
}

std::vector<double> ToyDenoiser::time_embedding(double t) const {
    const double u = 1.0 - t;
    const double envelope = u * u * u;
    std::vector<double> emb(static_cast<std::size_t>(dims_.channels));
    const double ratio = kEmbedFreqMax / kEmbedFreqMin;
    for (int c = 0; c < dims_.channels; ++c) {
        const double frac = static_cast<double>(c) / static_cast<double>(dims_.channels - 1);
        const double w = kEmbedFreqMin * std::pow(ratio, frac);
        emb[static_cast<std::size_t>(c)] = envelope * std::cos(w * u);
    }
    return emb;
}

FeatureTensor ToyDenoiser::run(const FeatureTensor& x, double t, const Hook& hook,
                               const SlotProducer& producer) const {
    const std::vector<std::size_t> want{static_cast<std::size_t>(dims_.tokens),
                                        static_cast<std::size_t>(dims_.channels)};
    if (x.shape != want) {
        throw std::invalid_argument("ToyDenoiser: input shape " + shape_string(x.shape) +
                                    " does not match " + shape_string(want));
    }

    const int tk = dims_.tokens;
    const int ch = dims_.channels;
    const std::vector<double> emb = time_embedding(t);

    FeatureTensor h = x;
    for (int r = 0; r < tk; ++r) {
        for (int c = 0; c < ch; ++c) {
            h.data[static_cast<std::size_t>(r) * ch + c] += emb[static_cast<std::size_t>(c)];
        }
    }

    for (int l = 0; l < dims_.layers; ++l) {
        const LayerWeights& w = layers_[static_cast<std::size_t>(l)];
        for (Submodule sub : {Submodule::self_attention, Submodule::cross_attention, Submodule::mlp}) {
            const SlotId slot{l, sub};
            FeatureTensor y;
            if (producer) {
                y = producer(slot);
                if (!y.same_shape(h)) {
                    throw std::invalid_argument("ToyDenoiser: produced feature for " + slot.name() +
                                                " has shape " + shape_string(y.shape) + ", expected " +
                                                shape_string(h.shape));
                }
            } else {
                std::vector<double> f;
                switch (sub) {
                    case Submodule::self_attention:
                        f = attention(h.data, tk, h.data, tk, ch, w.sa_q, w.sa_k, w.sa_v, w.sa_o);
                        break;
                    case Submodule::cross_attention:
                        f = attention(h.data, tk, context_, tk, ch, w.ca_q, w.ca_k, w.ca_v, w.ca_o);
                        break;
                    case Submodule::mlp: {
                        std::vector<double> hidden = matmul(h.data, tk, ch, w.mlp_in, dims_.hidden);
                        for (auto& v : hidden) v = std::tanh(v);
                        f = matmul(hidden, tk, dims_.hidden, w.mlp_out, ch);
                        break;
                    }
                }
                for (auto& v : f) v *= w.scale;
                y = FeatureTensor{h.shape, std::move(f)};
                if (hook) hook(slot, y);
            }
            for (std::size_t i = 0; i < h.data.size(); ++i) h.data[i] += y.data[i];
        }
    }
    return h;
}

FeatureTensor ToyDenoiser::forward(const FeatureTensor& x, double t, const Hook& hook) const {
    return run(x, t, hook, {});
}

FeatureTensor ToyDenoiser::forward_with(const FeatureTensor& x, double t,
                                        const SlotProducer& producer) const {
    if (!producer) throw std::invalid_argument("ToyDenoiser::forward_with: null producer");
    return run(x, t, {}, producer);
}

FeatureTensor initial_state(const SamplerConfig& config, const DenoiserDims& dims) {
    Xoshiro256ss rng(config.seed ^ kStateStreamTag);
    FeatureTensor x = FeatureTensor::zeros({static_cast<std::size_t>(dims.tokens),
                                            static_cast<std::size_t>(dims.channels)});
    for (auto& v : x.data) v = rng.normal();
    return x;
}

SampleResult sample(const SamplerConfig& config, const ToyDenoiser& model,
                    const ActivationSchedule& schedule, CacheSet& caches,
                    const SampleOptions& options) {
    if (schedule.total_steps() != config.total_steps) {
        throw std::invalid_argument("sample: schedule has " + std::to_string(schedule.total_steps()) +
                                    " steps but config expects " + std::to_string(config.total_steps));
    }
    if (caches.slot_count() != static_cast<std::size_t>(model.slot_count())) {
        throw std::invalid_argument("sample: cache set has " + std::to_string(caches.slot_count()) +
                                    " slots but model exposes " + std::to_string(model.slot_count()));
    }
    if (caches.at(SlotId{0, Submodule::self_attention}).interval() != schedule.interval()) {
        throw std::invalid_argument("sample: cache interval " +
                                    std::to_string(caches.at(SlotId{0, Submodule::self_attention}).interval()) +
                                    " does not match schedule interval " +
                                    std::to_string(schedule.interval()));
    }

    const int total = config.total_steps;
    const double dt = 1.0 / static_cast<double>(total);
    const int slot_count = model.slot_count();

    SampleResult result;
    result.full_steps = schedule.full_count();
    if (options.record) {
        result.features.resize(static_cast<std::size_t>(slot_count));
        result.timesteps.reserve(static_cast<std::size_t>(total));
    }

    FeatureTensor x = initial_state(config, model.dims());

    for (int step = 0; step < total; ++step) {
        const double t = 1.0 - static_cast<double>(step) / static_cast<double>(total);
        const StepDecision decision = schedule.decisions()[static_cast<std::size_t>(step)];

        FeatureTensor denoised;
        std::vector<FeatureTensor> step_features;
        if (options.record) step_features.resize(static_cast<std::size_t>(slot_count));

        if (decision.full) {
            denoised = model.forward(x, t, [&](SlotId slot, const FeatureTensor& y) {
                caches.at(slot).update(y, t);
                if (options.record) step_features[static_cast<std::size_t>(slot.index())] = y;
            });
        } else {
            std::vector<FeatureTensor> shadow;
            if (options.diagnostic) {
                shadow.resize(static_cast<std::size_t>(slot_count));
                model.forward(x, t, [&](SlotId slot, const FeatureTensor& y) {
                    shadow[static_cast<std::size_t>(slot.index())] = y;
                });
            }
            StepErrors errs;
            errs.step = step;
            errs.offset = decision.offset;
            denoised = model.forward_with(x, t, [&](SlotId slot) {
                FeatureTensor y = caches.at(slot).predict(decision.offset);
                if (options.diagnostic) {
                    errs.errors.push_back(l2_distance(y, shadow[static_cast<std::size_t>(slot.index())]));
                }
                if (options.record) step_features[static_cast<std::size_t>(slot.index())] = y;
                return y;
            });
            if (options.diagnostic) result.diagnostics.push_back(std::move(errs));
        }

        if (options.record) {
            result.timesteps.push_back(t);
            for (int s = 0; s < slot_count; ++s) {
                result.features[static_cast<std::size_t>(s)].push_back(
                    std::move(step_features[static_cast<std::size_t>(s)]));
            }
        }

        const double sigma = config.sigma_max * t;
        for (std::size_t i = 0; i < x.data.size(); ++i) {
            x.data[i] -= sigma * (x.data[i] - denoised.data[i]) * dt;
        }
    }

    result.final_state = std::move(x);
    return result;
}

} // namespace taycast
