// SPDX-License-Identifier: Apache-2.0

#include "taycast/metrics.hpp"

#include "taycast/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace taycast {

namespace {

constexpr double kPsnrCap = 300.0;
constexpr double kDerivativeGridStep = 1e-3;
constexpr int kProbeCount = 8;

} // namespace

DivergenceReport divergence_report(const FeatureTensor& accelerated_final,
                                   const FeatureTensor& full_final) {
    if (!accelerated_final.same_shape(full_final)) {
        throw std::invalid_argument("divergence_report: shape mismatch " +
                                    shape_string(accelerated_final.shape) + " vs " +
                                    shape_string(full_final.shape));
    }
    DivergenceReport rep;
    rep.l2 = l2_distance(accelerated_final, full_final);

    double range = 0.0;
    for (std::size_t i = 0; i < full_final.size(); ++i) {
        rep.max_abs = std::max(rep.max_abs, std::abs(accelerated_final.data[i] - full_final.data[i]));
        range = std::max(range, std::abs(full_final.data[i]));
    }

    const double rmse = rep.l2 / std::sqrt(static_cast<double>(full_final.size()));
    if (rmse == 0.0) {
        rep.psnr_like = kPsnrCap;
    } else if (range == 0.0) {
        rep.psnr_like = -kPsnrCap;
    } else {
        rep.psnr_like = std::clamp(20.0 * std::log10(range / rmse), -kPsnrCap, kPsnrCap);
    }
    return rep;
}

std::uint64_t full_step_macs(const DenoiserDims& dims) {
    const auto tk = static_cast<std::uint64_t>(dims.tokens);
    const auto ch = static_cast<std::uint64_t>(dims.channels);
    const auto hid = static_cast<std::uint64_t>(dims.hidden);
    const std::uint64_t attention = 2 * tk * tk * ch + 4 * tk * ch * ch;
    const std::uint64_t mlp = 2 * tk * ch * hid;
    return static_cast<std::uint64_t>(dims.layers) * (2 * attention + mlp);
}

std::uint64_t FlopLedger::full_total() const {
    std::uint64_t acc = 0;
    for (auto v : full_compute) acc += v;
    return acc;
}

std::uint64_t FlopLedger::prediction_total() const {
    std::uint64_t acc = 0;
    for (auto v : prediction_overhead) acc += v;
    return acc;
}

double FlopLedger::speedup() const {
    const std::uint64_t t = total();
    if (t == 0) return 0.0;
    return static_cast<double>(full_only_total) / static_cast<double>(t);
}

FlopLedger count_flops(const DenoiserDims& dims, const ActivationSchedule& schedule, int order_m) {
    if (order_m < 0 || order_m > kMaxOrder) {
        throw std::invalid_argument("count_flops: order " + std::to_string(order_m) +
                                    " outside supported range [0," + std::to_string(kMaxOrder) + "]");
    }
    const std::uint64_t step_macs = full_step_macs(dims);
    const std::uint64_t slot_elems =
        static_cast<std::uint64_t>(dims.tokens) * static_cast<std::uint64_t>(dims.channels);
    const std::uint64_t slots = static_cast<std::uint64_t>(dims.layers) * 3;

    FlopLedger ledger;
    const auto total = static_cast<std::size_t>(schedule.total_steps());
    ledger.full_compute.assign(total, 0);
    ledger.prediction_overhead.assign(total, 0);
    ledger.full_only_total = step_macs * static_cast<std::uint64_t>(schedule.total_steps());

    long activations = 0;
    for (std::size_t i = 0; i < total; ++i) {
        if (schedule.decisions()[i].full) {
            ledger.full_compute[i] = step_macs;
            ++activations;
        } else {
            const long m_eff = std::min<long>(order_m, std::max<long>(activations - 1, 0));
            ledger.prediction_overhead[i] = slots * static_cast<std::uint64_t>(m_eff) * slot_elems;
        }
    }
    return ledger;
}

namespace {

// Residual of the derivative estimate the degree-m extrapolation actually
// applies in term i: the stored difference rescaled by the ratio between the
// extrapolation weight and the plain Taylor weight (-k)^i/(i! n^i).
double effective_residual(const AnalyticTrajectory& traj, double anchor, int n, int m, int i,
                          double weight_ratio) {
    std::vector<FeatureTensor> history;
    history.reserve(static_cast<std::size_t>(m) + 1);
    for (int j = m; j >= 0; --j) {
        history.push_back(analytic_eval(traj, anchor + static_cast<double>(j * n), 0));
    }
    const FeatureTensor diff = binomial_difference(history, i);
    const FeatureTensor exact = analytic_eval(traj, anchor, i);
    const double inv_ni = 1.0 / std::pow(static_cast<double>(n), i);
    double acc = 0.0;
    for (std::size_t c = 0; c < diff.size(); ++c) {
        const double est = weight_ratio * diff.data[c] * inv_ni;
        const double r = est - exact.data[c];
        acc += r * r;
    }
    return std::sqrt(acc);
}

} // namespace

BoundCheck verify_error_bound(const AnalyticTrajectory& traj, int n, int m, int k) {
    if (n < 1) throw std::invalid_argument("verify_error_bound: interval must be >= 1");
    if (m < 0 || m > kMaxOrder) throw std::invalid_argument("verify_error_bound: unsupported order");
    if (k < 1) throw std::invalid_argument("verify_error_bound: offset must be >= 1");

    // Exact samples at t = m*n ... 0, newest last; predict at -k.
    TaylorCache cache(m, n);
    for (int j = m; j >= 0; --j) {
        cache.update(analytic_eval(traj, static_cast<double>(j * n), 0), static_cast<double>(j * n));
    }
    const FeatureTensor predicted = cache.predict(k);
    const FeatureTensor truth = analytic_eval(traj, -static_cast<double>(k), 0);

    BoundCheck check;
    check.empirical_error = l2_distance(predicted, truth);

    // M_{m+1}: componentwise dense-grid sup over [-k, 0], combined in l2.
    const std::size_t comps = shape_element_count(traj.shape);
    std::vector<double> comp_sup(comps, 0.0);
    const double lo = -static_cast<double>(k);
    for (double t = lo; t <= 1e-12; t += kDerivativeGridStep) {
        const FeatureTensor d = analytic_eval(traj, std::min(t, 0.0), m + 1);
        for (std::size_t c = 0; c < comps; ++c) comp_sup[c] = std::max(comp_sup[c], std::abs(d.data[c]));
    }
    double msq = 0.0;
    for (double v : comp_sup) msq += v * v;
    check.estimate.m_sup = std::sqrt(msq);

    const double s = static_cast<double>(k) / static_cast<double>(n);
    const std::vector<double> coeffs = prediction_coefficients(s, m);

    check.estimate.bound_value =
        check.estimate.m_sup / exact_factorial(m + 1) * std::pow(static_cast<double>(k), m + 1);
    check.estimate.c_consts.assign(static_cast<std::size_t>(m), 0.0);
    for (int i = 1; i <= m; ++i) {
        // |c_i| relative to k^i/(i! n^i): the factor by which the stored
        // difference is rescaled before standing in for the derivative term.
        const double plain = std::pow(s, i) / exact_factorial(i);
        const double ratio = std::abs(coeffs[static_cast<std::size_t>(i - 1)]) / plain;
        double sup = 0.0;
        for (int p = 0; p < kProbeCount; ++p) {
            const double anchor = static_cast<double>(p) * static_cast<double>(n) / 4.0;
            sup = std::max(sup, effective_residual(traj, anchor, n, m, i, ratio));
        }
        const double c_i = sup * std::pow(static_cast<double>(n), i - 1);
        check.estimate.c_consts[static_cast<std::size_t>(i - 1)] = c_i;
        check.estimate.bound_value +=
            c_i / (exact_factorial(i) * std::pow(static_cast<double>(n), i - 1)) *
            std::pow(static_cast<double>(k), i);
    }

    check.bound_value = check.estimate.bound_value;
    check.satisfied = check.empirical_error <= check.bound_value * (1.0 + 1e-9);
    return check;
}

double estimate_derivative_sup(std::span<const FeatureTensor> path, int order) {
    if (order < 0 || order > kMaxTableOrder) {
        throw std::invalid_argument("estimate_derivative_sup: unsupported order " +
                                    std::to_string(order));
    }
    if (path.size() <= static_cast<std::size_t>(order)) {
        throw std::invalid_argument("estimate_derivative_sup: path of length " +
                                    std::to_string(path.size()) + " cannot support order " +
                                    std::to_string(order));
    }
    double sup = 0.0;
    const std::size_t window = static_cast<std::size_t>(order) + 1;
    for (std::size_t start = 0; start + window <= path.size(); ++start) {
        const FeatureTensor diff = binomial_difference(path.subspan(start, window), order);
        double sq = 0.0;
        for (double v : diff.data) sq += v * v;
        sup = std::max(sup, std::sqrt(sq));
    }
    return sup;
}

} // namespace taycast
