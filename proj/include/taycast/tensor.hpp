// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace taycast {

/// Dense real-valued feature block. Data is row-major, 64-bit, and immutable
/// by convention once a tensor has been handed to a cache or a hook.
struct FeatureTensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    FeatureTensor() = default;
    FeatureTensor(std::vector<std::size_t> shape_in, std::vector<double> data_in);

    static FeatureTensor zeros(std::vector<std::size_t> shape_in);
    static FeatureTensor scalar(double value);

    std::size_t size() const { return data.size(); }
    bool same_shape(const FeatureTensor& other) const { return shape == other.shape; }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }
};

std::string shape_string(std::span<const std::size_t> shape);
std::size_t shape_element_count(std::span<const std::size_t> shape);

/// z[i] = alpha * x[i] + y[i]. Shapes must match.
FeatureTensor axpy(double alpha, const FeatureTensor& x, const FeatureTensor& y);

/// sqrt(sum((a[i] - b[i])^2)). Shapes must match.
double l2_distance(const FeatureTensor& a, const FeatureTensor& b);

} // namespace taycast
