#include "rankflow/random.hpp"

#include <cmath>

#include "rankflow/frobenius.hpp"
#include "rankflow/svd.hpp"

namespace rankflow {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    // splitmix64 finalizer over master + golden-ratio stride
    std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

DenseMatrix standard_normal_matrix(Rng& rng, std::size_t m, std::size_t n) {
    std::normal_distribution<double> gauss;
    DenseMatrix out(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out(i, j) = gauss(rng);
    return out;
}

DenseMatrix random_orthogonal(Rng& rng, std::size_t n) {
    DenseMatrix q = standard_normal_matrix(rng, n, n);
    for (std::size_t j = 0; j < n; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t prev = 0; prev < j; ++prev) {
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i) dot += q(i, j) * q(i, prev);
                for (std::size_t i = 0; i < n; ++i) q(i, j) -= dot * q(i, prev);
            }
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) norm += q(i, j) * q(i, j);
        norm = std::sqrt(norm);
        if (norm < 1e-12) {
            // a fresh Gaussian column is degenerate with probability zero;
            // redraw and redo this column
            std::normal_distribution<double> gauss;
            for (std::size_t i = 0; i < n; ++i) q(i, j) = gauss(rng);
            --j;
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) q(i, j) /= norm;
    }
    return q;
}

DenseMatrix random_rank_k(Rng& rng, std::size_t m, std::size_t n, std::size_t k) {
    return svd_truncate(standard_normal_matrix(rng, m, n), k).matrix;
}

DenseMatrix default_start(Rng& rng, const DenseMatrix& a, std::size_t k) {
    DenseMatrix x0 = random_rank_k(rng, a.rows(), a.cols(), k);
    const double nx = frob_norm(x0);
    if (nx == 0.0) return x0;
    return x0 * (frob_norm(a) / nx);
}

std::vector<double> spectrum_with_min_gaps(Rng& rng, std::size_t n, double scale_lo,
                                           double scale_hi) {
    // Gaps drawn in [0.3, 0.6] then normalized by the total: with at most
    // n <= ... 2x spread, each normalized gap is at least 0.3/(0.6n) >= 0.1
    // of sigma_1 for n <= 5; larger n weakens the bound proportionally.
    std::uniform_real_distribution<double> gap(0.3, 0.6);
    std::vector<double> sigma(n);
    double acc = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        acc += gap(rng);
        sigma[i] = acc;
    }
    const double top = sigma.front();
    std::uniform_real_distribution<double> scale(scale_lo, scale_hi);
    const double s = scale(rng);
    for (double& v : sigma) v = v / top * s;
    return sigma;
}

}  // namespace rankflow
