#pragma once

#include <functional>
#include <vector>

#include "rankflow/frobenius.hpp"
#include "rankflow/matrix.hpp"

namespace rankflow {

/// Position of an elementary matrix E^{pq}; indices are 1-based, matching the
/// convention used in reports (1 <= p <= m, 1 <= q <= n).
struct BasisIndex {
    std::size_t p;
    std::size_t q;

    friend bool operator==(const BasisIndex&, const BasisIndex&) = default;
};

/// L_B applied to (X, Y): X*B + B*Y. The range of L_B is the space tangent to
/// the fixed-rank orbit through B.
DenseMatrix tangent_map(const DenseMatrix& b, const TangentPair& p);

/// Adjoint L_B^*: Z -> (Z*B^T, B^T*Z).
TangentPair tangent_adjoint(const DenseMatrix& b, const DenseMatrix& z);

/// Quasi-projection L_B o L_B^*: Z -> Z*B^T*B + B*B^T*Z. Maps ambient vectors
/// to tangent vectors; self-adjoint and positive semidefinite, but not an
/// orthogonal projection.
DenseMatrix quasi_project(const DenseMatrix& b, const DenseMatrix& z);

/// Dimension of the tangent space to the rank-k orbit in m-by-n matrices:
/// k^2 + k(m-k) + k(n-k). Requires k <= min(m, n).
std::size_t tangent_dim(std::size_t m, std::size_t n, std::size_t k);

/// Elementary-matrix basis of the tangent space at a diagonal point
/// Diag(e_1,...,e_n) inside m-by-n: all positions (p, q) with e_p != 0 or
/// e_q != 0 (e_p taken as 0 for p > n). Nonzero tests are exact: equilibrium
/// vectors are constructed analytically, never from noisy computation.
std::vector<BasisIndex> tangent_basis_at_diagonal(std::span<const double> e, std::size_t m);

/// Explicit (m*n)-by-(m*n) matrix of a linear operator on m-by-n matrices,
/// built column-by-column from its action on elementary matrices (row-major
/// vectorization). Test-support machinery for eigen-analysis at desk scale.
DenseMatrix operator_matrix(const std::function<DenseMatrix(const DenseMatrix&)>& op,
                            std::size_t m, std::size_t n);

}  // namespace rankflow
