// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

namespace taycast {

/// Row-major matrix of one trajectory: a row per timestep, a column per
/// flattened feature coordinate. `order` records which derivative the rows
/// hold (0 = raw features).
struct TrajectoryMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    int order = 0;
    std::vector<double> values;

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// Forward-difference the rows `order` times and divide by n^order, mapping
/// a feature trajectory to its order-th derivative trajectory. Row count
/// drops by `order`.
TrajectoryMatrix derivative_trajectory(const TrajectoryMatrix& features, int order, int n);

struct PcaResult {
    std::size_t rows = 0;
    std::size_t cols = 0; // dimension after any subsampling
    std::size_t components = 0;
    std::vector<double> projections;        // rows x components, row-major
    std::vector<double> explained_variance; // nonincreasing, nonnegative
    std::vector<double> loadings;           // cols x components, eigenvectors in columns
    std::vector<double> column_means;       // per retained coordinate
};

/// PCA via cyclic Jacobi eigen-decomposition of the column-centered sample
/// covariance. Dimensions above 256 are reduced by seeded random coordinate
/// subsampling. Eigenvector signs are fixed, first significant loading
/// positive, making emitted projections implementation-stable.
PcaResult pca_project(const TrajectoryMatrix& matrix, std::size_t components);

} // namespace taycast
