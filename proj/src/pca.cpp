// SPDX-License-Identifier: Apache-2.0

#include "taycast/pca.hpp"

#include "taycast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace taycast {

namespace {

constexpr std::size_t kMaxPcaDims = 256;
constexpr std::uint64_t kSubsampleSeed = 0x70636173756273ULL; // fixed: subsampling must be reproducible
constexpr int kMaxJacobiSweeps = 64;

// Cyclic Jacobi on a symmetric matrix stored row-major. Returns eigenvalues
// in `a`'s diagonal and accumulates rotations into `vecs` (columns are
// eigenvectors).
void jacobi_eigen(std::vector<double>& a, std::size_t n, std::vector<double>& vecs) {
    vecs.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) vecs[i * n + i] = 1.0;

    for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
        double off = 0.0;
        double frob = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            frob += a[p * n + p] * a[p * n + p];
            for (std::size_t q = p + 1; q < n; ++q) {
                off += a[p * n + q] * a[p * n + q];
                frob += 2.0 * a[p * n + q] * a[p * n + q];
            }
        }
        if (off <= 1e-28 * frob || frob == 0.0) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a[i * n + p];
                    const double aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a[p * n + i];
                    const double aqi = a[q * n + i];
                    a[p * n + i] = c * api - s * aqi;
                    a[q * n + i] = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = vecs[i * n + p];
                    const double viq = vecs[i * n + q];
                    vecs[i * n + p] = c * vip - s * viq;
                    vecs[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }
}

} // namespace

TrajectoryMatrix derivative_trajectory(const TrajectoryMatrix& features, int order, int n) {
    if (features.order != 0) {
        throw std::invalid_argument("derivative_trajectory: input must hold raw features (order 0)");
    }
    if (order < 0) throw std::invalid_argument("derivative_trajectory: negative order");
    if (n < 1) throw std::invalid_argument("derivative_trajectory: interval must be >= 1");
    if (features.rows <= static_cast<std::size_t>(order)) {
        throw std::invalid_argument("derivative_trajectory: " + std::to_string(features.rows) +
                                    " rows cannot support order " + std::to_string(order));
    }

    TrajectoryMatrix out;
    out.cols = features.cols;
    out.order = order;
    out.values = features.values;
    std::size_t rows = features.rows;
    for (int o = 0; o < order; ++o) {
        std::vector<double> next((rows - 1) * out.cols);
        for (std::size_t r = 0; r + 1 < rows; ++r) {
            for (std::size_t c = 0; c < out.cols; ++c) {
                next[r * out.cols + c] =
                    out.values[(r + 1) * out.cols + c] - out.values[r * out.cols + c];
            }
        }
        out.values = std::move(next);
        --rows;
    }
    out.rows = rows;

    const double scale = 1.0 / std::pow(static_cast<double>(n), order);
    if (order > 0) {
        for (auto& v : out.values) v *= scale;
    }
    return out;
}

PcaResult pca_project(const TrajectoryMatrix& matrix, std::size_t components) {
    if (matrix.rows < 2) {
        throw std::invalid_argument("pca_project: need at least 2 rows, got " +
                                    std::to_string(matrix.rows));
    }
    if (components == 0 || components > std::min(matrix.rows, matrix.cols)) {
        throw std::invalid_argument("pca_project: components must be in [1, min(rows, cols)]");
    }

    // Dimensions above 256 are subsampled before the eigenproblem.
    std::vector<std::size_t> keep;
    if (matrix.cols > kMaxPcaDims) {
        std::vector<std::size_t> all(matrix.cols);
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        Xoshiro256ss rng(kSubsampleSeed);
        for (std::size_t i = 0; i < kMaxPcaDims; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.next() % (all.size() - i));
            std::swap(all[i], all[j]);
        }
        keep.assign(all.begin(), all.begin() + kMaxPcaDims);
        std::sort(keep.begin(), keep.end());
    } else {
        keep.resize(matrix.cols);
        for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
    }

    const std::size_t rows = matrix.rows;
    const std::size_t cols = keep.size();
    if (components > cols) {
        throw std::invalid_argument("pca_project: components exceed subsampled dimension " +
                                    std::to_string(cols));
    }

    // Column-center.
    std::vector<double> centered(rows * cols);
    std::vector<double> means(cols);
    for (std::size_t c = 0; c < cols; ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < rows; ++r) mean += matrix.at(r, keep[c]);
        mean /= static_cast<double>(rows);
        means[c] = mean;
        for (std::size_t r = 0; r < rows; ++r) centered[r * cols + c] = matrix.at(r, keep[c]) - mean;
    }

    // Sample covariance.
    std::vector<double> cov(cols * cols, 0.0);
    const double inv = 1.0 / static_cast<double>(rows - 1);
    for (std::size_t i = 0; i < cols; ++i) {
        for (std::size_t j = i; j < cols; ++j) {
            double acc = 0.0;
            for (std::size_t r = 0; r < rows; ++r) {
                acc += centered[r * cols + i] * centered[r * cols + j];
            }
            cov[i * cols + j] = acc * inv;
            cov[j * cols + i] = acc * inv;
        }
    }

    std::vector<double> vecs;
    jacobi_eigen(cov, cols, vecs);

    std::vector<std::size_t> order(cols);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return cov[a * cols + a] > cov[b * cols + b];
    });

    double trace = 0.0;
    for (std::size_t i = 0; i < cols; ++i) trace += std::abs(cov[i * cols + i]);

    PcaResult result;
    result.rows = rows;
    result.cols = cols;
    result.components = components;
    result.explained_variance.resize(components);
    result.projections.assign(rows * components, 0.0);
    result.loadings.assign(cols * components, 0.0);
    result.column_means = std::move(means);

    for (std::size_t k = 0; k < components; ++k) {
        const std::size_t src = order[k];
        double lambda = cov[src * cols + src];
        if (lambda < 0.0 && std::abs(lambda) <= 1e-12 * std::max(trace, 1e-300)) lambda = 0.0;
        result.explained_variance[k] = lambda;

        // Sign convention: first significant loading positive.
        std::vector<double> v(cols);
        double vmax = 0.0;
        for (std::size_t i = 0; i < cols; ++i) {
            v[i] = vecs[i * cols + src];
            vmax = std::max(vmax, std::abs(v[i]));
        }
        double sign = 1.0;
        for (std::size_t i = 0; i < cols; ++i) {
            if (std::abs(v[i]) > 1e-12 * vmax) {
                sign = v[i] > 0.0 ? 1.0 : -1.0;
                break;
            }
        }
        for (std::size_t i = 0; i < cols; ++i) result.loadings[i * components + k] = v[i] * sign;
        for (std::size_t r = 0; r < rows; ++r) {
            double acc = 0.0;
            for (std::size_t i = 0; i < cols; ++i) acc += centered[r * cols + i] * v[i];
            result.projections[r * components + k] = acc * sign;
        }
    }
    return result;
}

} // namespace taycast
