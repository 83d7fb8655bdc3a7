#include "rankflow/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rankflow/frobenius.hpp"
#include "rankflow/log.hpp"
#include "rankflow/random.hpp"

namespace rankflow {

namespace {

constexpr double kOrthTol = 1e-14;
constexpr int kMaxSweeps = 60;

double column_dot(const DenseMatrix& w, std::size_t p, std::size_t q) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.rows(); ++i) acc += w(i, p) * w(i, q);
    return acc;
}

void rotate_columns(DenseMatrix& w, std::size_t p, std::size_t q, double c, double s) {
    for (std::size_t i = 0; i < w.rows(); ++i) {
        const double wp = w(i, p);
        const double wq = w(i, q);
        w(i, p) = c * wp - s * wq;
        w(i, q) = s * wp + c * wq;
    }
}

/// Hestenes one-sided Jacobi on a tall matrix (m >= n): sweeps of plane
/// rotations applied to column pairs of W (and accumulated into V) until all
/// pairwise column inner products vanish relative to the column norms. On
/// exit the columns of W are orthogonal with norms equal to the singular
/// values.
void one_sided_jacobi(DenseMatrix& w, DenseMatrix& v) {
    const std::size_t n = w.cols();
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double alpha = column_dot(w, p, p);
                const double beta = column_dot(w, q, q);
                const double gamma = column_dot(w, p, q);
                if (std::abs(gamma) <= kOrthTol * std::sqrt(alpha * beta)) continue;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t =
                    std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                rotate_columns(w, p, q, c, s);
                rotate_columns(v, p, q, c, s);
                rotated = true;
            }
        }
        if (!rotated) return;
    }
    log_message(LogLevel::warn, "svd: one-sided Jacobi hit the sweep cap without full convergence");
}

/// Fills columns [filled_from, m) of u with an orthonormal completion of its
/// first filled_from columns, drawn deterministically from the standard basis.
void complete_basis(DenseMatrix& u, std::size_t filled_from) {
    const std::size_t m = u.rows();
    std::size_t next = filled_from;
    for (std::size_t cand = 0; cand < m && next < m; ++cand) {
        std::vector<double> vec(m, 0.0);
        vec[cand] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t j = 0; j < next; ++j) {
                double dot = 0.0;
                for (std::size_t i = 0; i < m; ++i) dot += vec[i] * u(i, j);
                for (std::size_t i = 0; i < m; ++i) vec[i] -= dot * u(i, j);
            }
        }
        double norm = 0.0;
        for (double x : vec) norm += x * x;
        norm = std::sqrt(norm);
        if (norm < 0.5) continue;
        for (std::size_t i = 0; i < m; ++i) u(i, next) = vec[i] / norm;
        ++next;
    }
}

void flip_column(DenseMatrix& m, std::size_t j) {
    for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) = -m(i, j);
}

/// Sign convention: flip U columns so each one's largest-magnitude entry is
/// positive, with the paired V column following; leftover V columns (wide
/// inputs) get the same rule on their own. Makes factors reproducible.
void fix_signs(SingularSpectrum& s) {
    const std::size_t m = s.u.rows();
    const std::size_t n = s.v.rows();
    const std::size_t l = s.sigma.size();
    for (std::size_t j = 0; j < m; ++j) {
        std::size_t imax = 0;
        for (std::size_t i = 1; i < m; ++i) {
            if (std::abs(s.u(i, j)) > std::abs(s.u(imax, j))) imax = i;
        }
        if (s.u(imax, j) < 0.0) {
            flip_column(s.u, j);
            if (j < l && j < n) flip_column(s.v, j);
        }
    }
    for (std::size_t j = l; j < n; ++j) {
        std::size_t imax = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (std::abs(s.v(i, j)) > std::abs(s.v(imax, j))) imax = i;
        }
        if (s.v(imax, j) < 0.0) flip_column(s.v, j);
    }
}

SingularSpectrum svd_tall(const DenseMatrix& a) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    DenseMatrix w = a;
    DenseMatrix v = DenseMatrix::identity(n);
    one_sided_jacobi(w, v);

    std::vector<double> sigma(n);
    for (std::size_t j = 0; j < n; ++j) sigma[j] = std::sqrt(column_dot(w, j, j));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return sigma[i] > sigma[j]; });

    const double sigma_max = sigma.empty() ? 0.0 : sigma[order.front()];
    const double dir_cutoff =
        sigma_max * static_cast<double>(std::max(m, n)) * std::numeric_limits<double>::epsilon();

    SingularSpectrum out;
    out.sigma.resize(n);
    out.u = DenseMatrix(m, m);
    out.v = DenseMatrix(n, n);
    std::size_t filled = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        out.sigma[j] = sigma[src];
        for (std::size_t i = 0; i < n; ++i) out.v(i, j) = v(i, src);
        // A negligible column norm carries no direction information; those U
        // columns come from the orthonormal completion instead. Sorting makes
        // the accepted columns a prefix.
        if (sigma[src] > dir_cutoff) {
            for (std::size_t i = 0; i < m; ++i) out.u(i, j) = w(i, src) / sigma[src];
            filled = j + 1;
        }
    }
    complete_basis(out.u, filled);
    return out;
}

}  // namespace

DenseMatrix SingularSpectrum::reconstruct() const {
    return u * DenseMatrix::diagonal(sigma, rows(), cols()) * v.transpose();
}

SingularSpectrum svd(const DenseMatrix& a) {
    if (a.empty()) throw shape_error("svd: empty matrix");
    SingularSpectrum s;
    if (a.rows() >= a.cols()) {
        s = svd_tall(a);
    } else {
        SingularSpectrum t = svd_tall(a.transpose());
        s = SingularSpectrum{std::move(t.sigma), std::move(t.v), std::move(t.u)};
    }
    fix_signs(s);
    return s;
}

Truncation svd_truncate(const DenseMatrix& a, std::size_t k) {
    const std::size_t l = std::min(a.rows(), a.cols());
    if (k == 0 || k > l) throw domain_error("svd_truncate: k must satisfy 1 <= k <= min(m, n)");
    const SingularSpectrum s = svd(a);
    const double cutoff = s.sigma.front() * 1e-12;
    std::size_t rank = 0;
    for (double sv : s.sigma)
        if (sv > cutoff) ++rank;
    if (rank <= k) return Truncation{a, true};
    std::vector<double> kept(s.sigma.begin(), s.sigma.begin() + static_cast<std::ptrdiff_t>(k));
    return Truncation{s.u * DenseMatrix::diagonal(kept, a.rows(), a.cols()) * s.v.transpose(),
                      false};
}

bool has_distinct_positive_singular_values(const DenseMatrix& a, double rel_gap) {
    if (rel_gap <= 0.0) throw domain_error("has_distinct_positive_singular_values: rel_gap <= 0");
    const SingularSpectrum s = svd(a);
    const double scale = s.sigma.front();
    if (scale == 0.0) return false;
    if (s.sigma.back() <= rel_gap * scale) return false;
    for (std::size_t i = 0; i + 1 < s.sigma.size(); ++i) {
        if (s.sigma[i] - s.sigma[i + 1] <= rel_gap * scale) return false;
    }
    return true;
}

std::size_t numerical_rank(const DenseMatrix& a, double rel_tol) {
    if (rel_tol <= 0.0) throw domain_error("numerical_rank: rel_tol <= 0");
    const SingularSpectrum s = svd(a);
    const double scale = s.sigma.front();
    if (scale == 0.0) return 0;
    std::size_t rank = 0;
    for (double sv : s.sigma)
        if (sv > rel_tol * scale) ++rank;
    return rank;
}

DenseMatrix generate_with_spectrum(std::size_t m, std::size_t n, std::span<const double> sigma,
                                   std::uint64_t seed) {
    if (sigma.size() != std::min(m, n)) {
        throw shape_error("generate_with_spectrum: sigma length must be min(m, n)");
    }
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        if (sigma[i] < 0.0) throw domain_error("generate_with_spectrum: negative singular value");
        if (i > 0 && sigma[i] > sigma[i - 1]) {
            throw domain_error("generate_with_spectrum: sigma not sorted descending");
        }
    }
    Rng rng(seed);
    const DenseMatrix u = random_orthogonal(rng, m);
    const DenseMatrix v = random_orthogonal(rng, n);
    return u * DenseMatrix::diagonal(sigma, m, n) * v.transpose();
}

}  // namespace rankflow
