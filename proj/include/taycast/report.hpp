// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "taycast/metrics.hpp"
#include "taycast/schedule.hpp"
#include "taycast/toy_model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace taycast {

/// 17-significant-digit decimal form, the pinned real format for reports
/// and CSV output.
std::string format_real(double v);

/// Structured record of one accelerated run. Serialization is deterministic:
/// fixed key order, format_real for every real, no timing or environment
/// fields.
struct RunReport {
    // config echo
    int total_steps = 0;
    int interval = 1;
    int order = 0;
    int tail_dense = 0;
    std::uint64_t seed = 0;
    DenoiserDims dims;
    bool diagnostic = false;

    std::string decisions;
    int full_steps = 0;

    std::uint64_t flops_full = 0;
    std::uint64_t flops_prediction = 0;
    std::uint64_t flops_total = 0;
    std::uint64_t flops_full_only = 0;
    double speedup = 0.0;
    double theoretical_speedup = 0.0;

    DivergenceReport divergence;

    std::vector<std::string> slot_names;
    std::vector<StepErrors> step_errors; // diagnostic mode only

    std::string to_json() const;
};

/// Assemble the report for a finished run: schedule trace, FLOP accounting,
/// and divergence against the all-FULL reference final state.
RunReport build_run_report(const SamplerConfig& config, const DenoiserDims& dims,
                           const ActivationSchedule& schedule, int order,
                           const SampleResult& accelerated, const FeatureTensor& full_final,
                           bool diagnostic);

} // namespace taycast
