// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace taycast {

/// xoshiro256** with splitmix64 seeding. The algorithm (not a library handle)
/// is part of the contract: identical seeds must yield identical weight
/// streams in any implementation of this format.
class Xoshiro256ss {
public:
    explicit Xoshiro256ss(std::uint64_t seed);

    std::uint64_t next();

    /// Uniform in [0, 1): top 53 bits of the next draw.
    double uniform01();

    /// Standard normal via Box-Muller. Consumes exactly two raw draws:
    /// u1 in (0, 1] from the first, u2 in [0, 1) from the second.
    double normal();

private:
    std::uint64_t state_[4];
};

} // namespace taycast
