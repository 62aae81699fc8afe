// SPDX-License-Identifier: Apache-2.0

#include "taycast/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace taycast {

std::size_t shape_element_count(std::span<const std::size_t> shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_string(std::span<const std::size_t> shape) {
    std::ostringstream oss;
    oss << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) oss << ',';
        oss << shape[i];
    }
    oss << ']';
    return oss.str();
}

FeatureTensor::FeatureTensor(std::vector<std::size_t> shape_in, std::vector<double> data_in)
    : shape(std::move(shape_in)), data(std::move(data_in)) {
    if (shape.empty()) {
        throw std::invalid_argument("FeatureTensor: shape must have at least one dimension");
    }
    for (std::size_t d : shape) {
        if (d == 0) {
            throw std::invalid_argument("FeatureTensor: zero dimension in shape " + shape_string(shape));
        }
    }
    if (shape_element_count(shape) != data.size()) {
        std::ostringstream oss;
        oss << "FeatureTensor: shape " << shape_string(shape) << " implies "
            << shape_element_count(shape) << " elements but data has " << data.size();
        throw std::invalid_argument(oss.str());
    }
}

FeatureTensor FeatureTensor::zeros(std::vector<std::size_t> shape_in) {
    std::size_t n = shape_element_count(shape_in);
    return FeatureTensor(std::move(shape_in), std::vector<double>(n, 0.0));
}

FeatureTensor FeatureTensor::scalar(double value) {
    return FeatureTensor({1}, {value});
}

FeatureTensor axpy(double alpha, const FeatureTensor& x, const FeatureTensor& y) {
    if (!x.same_shape(y)) {
        throw std::invalid_argument("axpy: shape mismatch " + shape_string(x.shape) +
                                    " vs " + shape_string(y.shape));
    }
    FeatureTensor z = y;
    for (std::size_t i = 0; i < z.data.size(); ++i) {
        z.data[i] = alpha * x.data[i] + y.data[i];
    }
    return z;
}

double l2_distance(const FeatureTensor& a, const FeatureTensor& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("l2_distance: shape mismatch " + shape_string(a.shape) +
                                    " vs " + shape_string(b.shape));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

} // namespace taycast
