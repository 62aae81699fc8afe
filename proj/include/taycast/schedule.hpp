// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace taycast {

/// FULL recomputes the network and refreshes every cache; PREDICT replaces
/// each submodule with a cache extrapolation at the given offset.
struct StepDecision {
    bool full = true;
    int offset = 0; // timesteps past the most recent FULL step; 0 for FULL
};

/// Per-step decision sequence. Step indices count sampler iterations from
/// the first (highest-noise) step; the mapping to decreasing model time is
/// owned by the sampler.
class ActivationSchedule {
public:
    /// FULL at indices 0, N, 2N, ...; PREDICT{k = index mod N} otherwise.
    /// The final tail_dense steps are forced FULL.
    static ActivationSchedule uniform(int total_steps, int interval_n, int tail_dense = 0);

    int total_steps() const { return total_steps_; }
    int interval() const { return interval_n_; }
    int tail_dense() const { return tail_dense_; }
    const std::vector<StepDecision>& decisions() const { return decisions_; }

    int full_count() const;

    /// "F,P1,P2,F,...": the form embedded in run reports.
    std::string decision_string() const;

private:
    ActivationSchedule() = default;

    int total_steps_ = 0;
    int interval_n_ = 1;
    int tail_dense_ = 0;
    std::vector<StepDecision> decisions_;
};

/// total steps / FULL count, ignoring prediction cost. Upper bound on any
/// achievable speedup for the schedule.
double theoretical_speedup(const ActivationSchedule& schedule);

} // namespace taycast
