#include "rankflow/equilibria.hpp"

#include <algorithm>
#include <cmath>

#include "rankflow/frobenius.hpp"
#include "rankflow/log.hpp"

namespace rankflow {

namespace {

bool spectrum_is_generic(std::span<const double> sigma) {
    if (sigma.empty()) return false;
    const double scale = sigma.front();
    if (scale <= 0.0) return false;
    if (sigma.back() <= kDistinctRelGap * scale) return false;
    for (std::size_t i = 0; i + 1 < sigma.size(); ++i) {
        if (sigma[i] - sigma[i + 1] <= kDistinctRelGap * scale) return false;
    }
    return true;
}

void require_generic(std::span<const double> sigma, const char* who) {
    if (!spectrum_is_generic(sigma)) {
        throw degeneracy_error(std::string(who) +
                               ": spectrum does not have distinct positive singular values");
    }
}

void require_equilibrium_vector(std::span<const double> sigma, std::span<const double> e) {
    if (e.size() != sigma.size()) {
        throw shape_error("equilibrium vector length must match the spectrum");
    }
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] != 0.0 && e[i] != sigma[i]) {
            throw domain_error("equilibrium vector entries must be exactly sigma_i or 0");
        }
    }
}

std::size_t binomial_capped(std::size_t n, std::size_t k, std::size_t cap) {
    std::size_t c = 1;
    for (std::size_t i = 0; i < k; ++i) {
        c = c * (n - i) / (i + 1);
        if (c > cap) return cap + 1;
    }
    return c;
}

}  // namespace

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::stable: return "stable";
        case Verdict::unstable: return "unstable";
        case Verdict::degenerate: return "degenerate";
    }
    return "unknown";
}

double equilibrium_residual(const DenseMatrix& a, const DenseMatrix& e) {
    require_same_shape(a, e, "equilibrium_residual");
    const DenseMatrix et = e.transpose();
    return std::max(frob_norm(a * et - e * et), frob_norm(et * a - et * e));
}

std::pair<double, double> quasi_commuting_residual(const DenseMatrix& a, const DenseMatrix& e) {
    require_same_shape(a, e, "quasi_commuting_residual");
    const DenseMatrix at = a.transpose();
    const DenseMatrix et = e.transpose();
    return {frob_norm(a * et - e * at), frob_norm(at * e - et * a)};
}

DenseMatrix linearization_apply(const DenseMatrix& a, const DenseMatrix& e, const DenseMatrix& x) {
    require_same_shape(a, e, "linearization_apply");
    require_same_shape(a, x, "linearization_apply");
    const double res = equilibrium_residual(a, e);
    if (res > 1e-8 * (1.0 + frob_norm(a)) * (1.0 + frob_norm(e))) {
        log_message(LogLevel::warn,
                    "linearization_apply: E is not an equilibrium (residual " +
                        std::to_string(res) + "); the formula is the flow's derivative only there");
    }
    const DenseMatrix d = a - e;
    const DenseMatrix xt = x.transpose();
    const DenseMatrix et = e.transpose();
    return d * xt * e + e * xt * d - x * et * e - e * et * x;
}

DenseMatrix linearization_matrix(const DenseMatrix& a, const DenseMatrix& e,
                                 std::span<const BasisIndex> basis) {
    const std::size_t dim = basis.size();
    DenseMatrix out(dim, dim);
    for (std::size_t col = 0; col < dim; ++col) {
        const DenseMatrix image = linearization_apply(
            a, e, DenseMatrix::unit(a.rows(), a.cols(), basis[col].p - 1, basis[col].q - 1));
        for (std::size_t row = 0; row < dim; ++row) {
            out(row, col) = image(basis[row].p - 1, basis[row].q - 1);
        }
    }
    return out;
}

std::vector<EigenvalueEntry> linearization_eigenvalues(std::span<const double> sigma,
                                                       std::span<const double> e, std::size_t m) {
    const std::size_t n = sigma.size();
    if (m < n) throw domain_error("linearization_eigenvalues: needs m >= len(sigma)");
    require_equilibrium_vector(sigma, e);

    std::vector<EigenvalueEntry> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (e[i] != 0.0) {
            out.push_back({2.0 * e[i] * (sigma[i] - 2.0 * e[i]),
                           EigenvalueEntry::Kind::diagonal, i + 1, i + 1});
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (e[i] == 0.0 && e[j] == 0.0) continue;
            const double a_ij = e[i] * e[i] + e[j] * e[j];
            const double b_ij = (sigma[i] - e[i]) * e[j] + e[i] * (sigma[j] - e[j]);
            out.push_back({-a_ij + b_ij, EigenvalueEntry::Kind::pair_sum, i + 1, j + 1});
            out.push_back({-a_ij - b_ij, EigenvalueEntry::Kind::pair_diff, i + 1, j + 1});
        }
    }
    for (std::size_t p = n; p < m; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            if (e[q] == 0.0) continue;
            out.push_back({-e[q] * e[q], EigenvalueEntry::Kind::single, p + 1, q + 1});
        }
    }
    return out;
}

EquilibriumReport classify(const SingularSpectrum& spectrum, std::span<const double> e) {
    require_generic(spectrum.sigma, "classify");
    require_equilibrium_vector(spectrum.sigma, e);
    const std::size_t m = spectrum.rows();
    const std::size_t n = spectrum.cols();
    const bool wide = m < n;
    const std::size_t tall_rows = std::max(m, n);

    EquilibriumReport report;
    report.e.assign(e.begin(), e.end());
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] != 0.0) report.support.push_back(i + 1);
    }

    const DenseMatrix a_diag = DenseMatrix::diagonal(spectrum.sigma, m, n);
    const DenseMatrix e_diag = DenseMatrix::diagonal(e, m, n);
    report.residual_equilibrium = equilibrium_residual(a_diag, e_diag);
    report.residual_quasi_commuting = quasi_commuting_residual(a_diag, e_diag);

    report.eigenvalues = linearization_eigenvalues(spectrum.sigma, e, tall_rows);
    if (wide) {
        // the wide problem is the transpose of the tall one; mirror the
        // unpaired directions back to the original orientation
        for (EigenvalueEntry& entry : report.eigenvalues) {
            if (entry.kind == EigenvalueEntry::Kind::single) std::swap(entry.p, entry.q);
        }
    }

    bool any_zero = false;
    bool any_positive = false;
    for (const EigenvalueEntry& entry : report.eigenvalues) {
        if (entry.value == 0.0) any_zero = true;
        if (entry.value > 0.0) any_positive = true;
    }
    report.verdict = any_zero ? Verdict::degenerate
                              : (any_positive ? Verdict::unstable : Verdict::stable);

    if (report.verdict == Verdict::unstable) {
        const std::size_t l = spectrum.sigma.size();
        for (std::size_t p = 0; p < l && !report.witness.has_value(); ++p) {
            if (e[p] != 0.0) continue;
            for (std::size_t q = p + 1; q < l; ++q) {
                if (e[q] == 0.0) continue;
                report.witness = InstabilityWitness{
                    p + 1, q + 1, (spectrum.sigma[p] - spectrum.sigma[q]) * spectrum.sigma[q]};
                break;
            }
        }
    }
    return report;
}

std::vector<EquilibriumReport> enumerate_equilibria(const SingularSpectrum& spectrum,
                                                    std::size_t k) {
    require_generic(spectrum.sigma, "enumerate_equilibria");
    const std::size_t l = spectrum.sigma.size();
    if (k == 0 || k > l) throw domain_error("enumerate_equilibria: k must satisfy 1 <= k <= n");
    if (l > 20) throw domain_error("enumerate_equilibria: spectra longer than 20 not supported");
    constexpr std::size_t kSubsetCap = 200000;
    if (binomial_capped(l, k, kSubsetCap) > kSubsetCap) {
        throw domain_error("enumerate_equilibria: C(n, k) exceeds the 200000-subset cap");
    }

    std::vector<EquilibriumReport> reports;
    std::vector<std::size_t> subset(k);
    for (std::size_t i = 0; i < k; ++i) subset[i] = i;
    while (true) {
        std::vector<double> e(l, 0.0);
        for (std::size_t idx : subset) e[idx] = spectrum.sigma[idx];
        reports.push_back(classify(spectrum, e));

        // next k-combination in lexicographic order
        std::size_t i = k;
        while (i-- > 0) {
            if (subset[i] != i + l - k) {
                ++subset[i];
                for (std::size_t j = i + 1; j < k; ++j) subset[j] = subset[j - 1] + 1;
                break;
            }
            if (i == 0) return reports;
        }
    }
}

std::optional<EquilibriumReport> match_to_equilibrium(const SingularSpectrum& spectrum,
                                                      const DenseMatrix& x, double tol) {
    if (tol <= 0.0) throw domain_error("match_to_equilibrium: tol <= 0");
    if (x.rows() != spectrum.rows() || x.cols() != spectrum.cols()) {
        throw shape_error("match_to_equilibrium: X does not match the spectrum's shape");
    }
    if (!spectrum_is_generic(spectrum.sigma)) {
        log_message(LogLevel::info,
                    "match_to_equilibrium: degenerate spectrum, matching skipped");
        return std::nullopt;
    }
    const DenseMatrix aligned = spectrum.u.transpose() * x * spectrum.v;
    const std::size_t l = spectrum.sigma.size();
    // entrywise nearest equilibrium vector: e_i is sigma_i or 0, chosen
    // independently per index
    std::vector<double> e(l, 0.0);
    for (std::size_t i = 0; i < l; ++i) {
        const double d = aligned(i, i);
        if (std::abs(d - spectrum.sigma[i]) <= std::abs(d)) e[i] = spectrum.sigma[i];
    }
    const DenseMatrix e_diag = DenseMatrix::diagonal(e, x.rows(), x.cols());
    if (frob_norm(aligned - e_diag) > tol) return std::nullopt;
    return classify(spectrum, e);
}

}  // namespace rankflow
