// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "taycast/schedule.hpp"
#include "taycast/tensor.hpp"
#include "taycast/toy_model.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace taycast {

struct DivergenceReport {
    double l2 = 0.0;
    double max_abs = 0.0;
    double psnr_like = 0.0; // 20*log10(range/rmse), range = max|full|, capped to +-300
};

DivergenceReport divergence_report(const FeatureTensor& accelerated_final,
                                   const FeatureTensor& full_final);

/// Multiply-accumulate counts per step, split into full computation and
/// prediction overhead. The cost model:
///   attention (SA or CA): 2*tokens^2*channels + 4*tokens*channels^2
///   MLP:                  2*tokens*channels*hidden
///   prediction per slot:  m_eff * tokens * channels
struct FlopLedger {
    std::vector<std::uint64_t> full_compute;
    std::vector<std::uint64_t> prediction_overhead;
    std::uint64_t full_only_total = 0; // cost of the all-FULL schedule

    std::uint64_t full_total() const;
    std::uint64_t prediction_total() const;
    std::uint64_t total() const { return full_total() + prediction_total(); }
    double speedup() const;
};

std::uint64_t full_step_macs(const DenoiserDims& dims);

/// Walk the schedule, tracking warmup, and account every step. The effective
/// order on a predicted step is min(order_m, activations_so_far - 1), the
/// same truncation the caches apply.
FlopLedger count_flops(const DenoiserDims& dims, const ActivationSchedule& schedule, int order_m);

/// Empirical content of the remainder-plus-difference error bound for a
/// prediction of order m at offset k from samples spaced n steps apart:
///
///   E_m(k) <= M_{m+1}/(m+1)! * k^(m+1) + sum_i C_i/(i! * n^(i-1)) * k^i
///
/// m_sup is the dense-grid supremum of the (m+1)-th derivative norm over
/// the prediction window. c_consts[i-1] holds C_i, fitted as the supremum
/// over >= 8 probe anchors of the residual between the scaled differences
/// the predictor actually uses and the exact derivative.
struct ErrorBoundEstimate {
    double m_sup = 0.0;
    std::vector<double> c_consts;
    double bound_value = 0.0;
};

struct BoundCheck {
    double empirical_error = 0.0;
    double bound_value = 0.0;
    bool satisfied = false;
    ErrorBoundEstimate estimate;
};

/// Sample the trajectory at t = m*n, (m-1)*n, ..., 0, predict k steps past
/// the anchor t = 0, and compare against the exact value at -k.
BoundCheck verify_error_bound(const AnalyticTrajectory& traj, int n, int m, int k);

/// Rough sup of the order-th derivative norm along a recorded step path
/// (unit spacing), from a sliding window of finite differences. This is an
/// estimate for models without a closed form; it never backs a hard
/// assertion.
double estimate_derivative_sup(std::span<const FeatureTensor> path, int order);

} // namespace taycast
