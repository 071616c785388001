#pragma once

#include <cstddef>
#include <vector>

#include "gridrep/core/matrix.hpp"
#include "gridrep/core/rng.hpp"

namespace gridrep {

struct SvdResult {
    Matrix u;                            // n×k, orthonormal columns
    std::vector<double> singular_values; // k values, non-increasing
    Matrix vt;                           // k×m, orthonormal rows

    std::size_t rank() const { return singular_values.size(); }
};

/// Thin SVD of any non-empty matrix with k = min(rows, cols).
///
/// Householder QR reduces the tall orientation to a square triangle, which is
/// then diagonalized by one-sided (Hestenes) Jacobi rotations. Singular values
/// below rows·cols·eps relative to the largest are reported as exact zeros and
/// their left vectors are completed with the same canonical-basis rule as
/// qr_orthonormalize, so u keeps orthonormal columns even for rank-deficient
/// input.
SvdResult exact_svd(const Matrix& a);

/// Orthonormal basis (columns) for the column space of a, rows >= cols.
///
/// Classical Gram-Schmidt with one re-orthogonalization pass. A column whose
/// residual falls below 1e-12 of its original norm is numerically dependent;
/// it is replaced by the first canonical basis vector e_i (in index order)
/// whose residual against the columns accepted so far exceeds 1e-3, after
/// orthogonalizing that vector the same way.
Matrix qr_orthonormalize(const Matrix& a);

/// Householder thin QR of a tall matrix: a = q·r with q m×n and r n×n upper
/// triangular.
struct QrResult {
    Matrix q;
    Matrix r;
};
QrResult householder_qr(const Matrix& a);

struct RandomizedSvdOptions {
    std::size_t oversample = 10;
    std::size_t power_iters = 2;
};

/// Rank-k approximation by a Gaussian range finder with power iterations
/// followed by an exact SVD of the projected matrix.
SvdResult randomized_svd(const Matrix& a, std::size_t k, std::size_t oversample, std::size_t power_iters,
                         SeededRng& rng);

inline SvdResult randomized_svd(const Matrix& a, std::size_t k, SeededRng& rng, RandomizedSvdOptions opts = {}) {
    return randomized_svd(a, k, opts.oversample, opts.power_iters, rng);
}

/// Gaussian matrix drawn row by row from rng.
Matrix gaussian_matrix(std::size_t rows, std::size_t cols, SeededRng& rng);

/// Solves the symmetric positive definite system a·x = b by Cholesky.
/// Returns false when a is not numerically positive definite.
bool cholesky_solve(const Matrix& a, std::vector<double> b, std::vector<double>& x);

/// Inverse of a symmetric positive definite matrix; false when not SPD.
bool cholesky_inverse(const Matrix& a, Matrix& inv);

}  // namespace gridrep
