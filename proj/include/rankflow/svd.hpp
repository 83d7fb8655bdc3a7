#pragma once

#include <cstdint>
#include <vector>

#include "rankflow/matrix.hpp"

namespace rankflow {

/// Full singular value decomposition A = U * Diag(sigma) * V^T with U m-by-m
/// and V n-by-n orthogonal and sigma of length min(m, n), weakly decreasing.
struct SingularSpectrum {
    std::vector<double> sigma;
    DenseMatrix u;
    DenseMatrix v;

    std::size_t rows() const { return u.rows(); }
    std::size_t cols() const { return v.rows(); }

    /// U * Diag(sigma) * V^T.
    DenseMatrix reconstruct() const;
};

/// Dense SVD by one-sided Jacobi rotations, iterated until all column pairs
/// are orthogonal to relative tolerance 1e-14. Deterministic: columns of U
/// are flipped so the largest-magnitude entry of each is positive, with V
/// following, and ties in the singular-value ordering keep sweep order.
SingularSpectrum svd(const DenseMatrix& a);

struct Truncation {
    DenseMatrix matrix;
    /// Set when rank(A) <= k, i.e. the closest-rank-k problem is degenerate
    /// and A is returned unchanged.
    bool rank_deficient = false;
};

/// Best rank-k approximation: keep the k largest singular values, zero the
/// rest. Requires k <= min(m, n).
Truncation svd_truncate(const DenseMatrix& a, std::size_t k);

/// True iff sigma_min > rel_gap * sigma_max and every consecutive gap
/// sigma_i - sigma_{i+1} exceeds rel_gap * sigma_max.
bool has_distinct_positive_singular_values(const DenseMatrix& a, double rel_gap);

/// Count of singular values above rel_tol times the largest; 0 for the zero
/// matrix.
std::size_t numerical_rank(const DenseMatrix& a, double rel_tol);

/// Test-problem factory: U * Diag(sigma) * V^T for random orthogonal U, V
/// drawn deterministically from `seed`. sigma must be sorted descending,
/// non-negative, of length min(m, n).
DenseMatrix generate_with_spectrum(std::size_t m, std::size_t n, std::span<const double> sigma,
                                   std::uint64_t seed);

}  // namespace rankflow
