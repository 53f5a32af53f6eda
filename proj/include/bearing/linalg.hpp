#pragma once

#include <cstddef>
#include <vector>

namespace bearing {

/// Dense row-major matrix of doubles. Just enough for the networks and PCA.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

    double* row(std::size_t r) { return a.data() + r * cols; }
    const double* row(std::size_t r) const { return a.data() + r * cols; }
};

struct EigenResult {
    std::vector<double> values;  // descending
    Matrix vectors;              // row k = eigenvector for values[k], unit norm
};

/// Full eigendecomposition of a symmetric matrix (Householder tridiagonal
/// reduction followed by implicit-shift QL). Eigenpairs returned in
/// descending eigenvalue order; eigenvectors orthonormal.
EigenResult symmetric_eigen(const Matrix& sym);

} // namespace bearing
