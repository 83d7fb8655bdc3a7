#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "rankflow/matrix.hpp"

namespace rankflow {

using Rng = std::mt19937_64;

/// Stateless mix for deriving independent per-trial seeds from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// m-by-n matrix of i.i.d. standard normal entries.
DenseMatrix standard_normal_matrix(Rng& rng, std::size_t m, std::size_t n);

/// Orthogonal matrix obtained by orthonormalizing a standard normal matrix
/// (modified Gram-Schmidt, two passes).
DenseMatrix random_orthogonal(Rng& rng, std::size_t n);

/// Rank-k matrix: SVD truncation of a standard normal m-by-n draw.
DenseMatrix random_rank_k(Rng& rng, std::size_t m, std::size_t n, std::size_t k);

/// Generic rank-k initial condition: random_rank_k scaled so its Frobenius
/// norm equals that of `a`.
DenseMatrix default_start(Rng& rng, const DenseMatrix& a, std::size_t k);

/// Descending positive spectrum of length n whose consecutive gaps (and the
/// smallest value) are at least 0.1 of the largest value, scaled by a random
/// factor in [scale_lo, scale_hi].
std::vector<double> spectrum_with_min_gaps(Rng& rng, std::size_t n, double scale_lo = 0.5,
                                           double scale_hi = 2.0);

}  // namespace rankflow
