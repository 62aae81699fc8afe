// SPDX-License-Identifier: Apache-2.0

#include "taycast/schedule.hpp"

#include <stdexcept>

namespace taycast {

ActivationSchedule ActivationSchedule::uniform(int total_steps, int interval_n, int tail_dense) {
    if (total_steps < 1) {
        throw std::invalid_argument("ActivationSchedule: total_steps must be >= 1, got " +
                                    std::to_string(total_steps));
    }
    if (interval_n < 1) {
        throw std::invalid_argument("ActivationSchedule: interval must be >= 1, got " +
                                    std::to_string(interval_n));
    }
    if (tail_dense < 0 || tail_dense >= total_steps) {
        throw std::invalid_argument("ActivationSchedule: tail_dense must be in [0, total_steps), got " +
                                    std::to_string(tail_dense));
    }

    ActivationSchedule s;
    s.total_steps_ = total_steps;
    s.interval_n_ = interval_n;
    s.tail_dense_ = tail_dense;
    s.decisions_.resize(static_cast<std::size_t>(total_steps));
    for (int i = 0; i < total_steps; ++i) {
        const int k = i % interval_n;
        const bool forced = i >= total_steps - tail_dense;
        if (k == 0 || forced) {
            s.decisions_[static_cast<std::size_t>(i)] = StepDecision{true, 0};
        } else {
            s.decisions_[static_cast<std::size_t>(i)] = StepDecision{false, k};
        }
    }
    return s;
}

int ActivationSchedule::full_count() const {
    int n = 0;
    for (const auto& d : decisions_) n += d.full ? 1 : 0;
    return n;
}

std::string ActivationSchedule::decision_string() const {
    std::string out;
    for (std::size_t i = 0; i < decisions_.size(); ++i) {
        if (i > 0) out += ',';
        if (decisions_[i].full) {
            out += 'F';
        } else {
            out += 'P';
            out += std::to_string(decisions_[i].offset);
        }
    }
    return out;
}

double theoretical_speedup(const ActivationSchedule& schedule) {
    return static_cast<double>(schedule.total_steps()) / static_cast<double>(schedule.full_count());
}

} // namespace taycast
