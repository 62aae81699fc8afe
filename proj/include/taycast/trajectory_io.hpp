// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "taycast/forecast.hpp"
#include "taycast/tensor.hpp"

#include <span>
#include <string>
#include <vector>

namespace taycast {

/// In-memory image of a trajectory file: per-slot, per-timestep feature
/// tensors sharing one shape.
struct Trajectory {
    std::vector<SlotId> slots;
    std::vector<std::size_t> shape;
    std::vector<double> timesteps;
    std::vector<std::vector<FeatureTensor>> features; // [slot][step]
};

/// Binary wire format (everything little-endian):
///   magic "TSTJ" | u32 version=1 | u32 slot count
///   per slot: u32 layer, u32 submodule (0=sa, 1=ca, 2=mlp)
///   u32 rank | u64 dims[rank]
///   u32 timestep count | f64 timesteps
///   payload: f64 per (slot, timestep, element), slot-major, row-major data
/// Writes are flushed and fsync'd before returning.
void write_trajectory(const std::string& path, const Trajectory& trajectory);

/// Exact inverse of write_trajectory. Bad magic, unsupported versions, and
/// size mismatches raise distinct errors naming the problem.
Trajectory read_trajectory(const std::string& path);

} // namespace taycast
