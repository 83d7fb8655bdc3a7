#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "rankflow/manifold.hpp"
#include "rankflow/matrix.hpp"
#include "rankflow/svd.hpp"

namespace rankflow {

enum class Verdict { stable, unstable, degenerate };

std::string to_string(Verdict v);

/// One eigenvalue of the linearized flow at an equilibrium, with the tangent
/// direction it belongs to. Indices are 1-based.
struct EigenvalueEntry {
    enum class Kind {
        diagonal,   ///< direction E^{ii}
        pair_sum,   ///< direction E^{pq} + E^{qp}
        pair_diff,  ///< direction E^{pq} - E^{qp}
        single,     ///< direction E^{pq} with no mirrored partner (p beyond the square block)
    };
    double value;
    Kind kind;
    std::size_t p;
    std::size_t q;
};

/// Direction along which an unstable equilibrium is repelling: indices p < q
/// with e_p = 0 and e_q = sigma_q, eigenvalue (sigma_p - sigma_q) sigma_q > 0
/// for E^{pq} + E^{qp}.
struct InstabilityWitness {
    std::size_t p;
    std::size_t q;
    double eigenvalue;
};

/// An equilibrium of the flow in the frame where the target is diagonal:
/// E = Diag(e) with each e_i either sigma_i or 0.
struct EquilibriumReport {
    std::vector<double> e;
    std::vector<std::size_t> support;  ///< 1-based indices with e_i != 0
    double residual_equilibrium = 0.0;
    std::pair<double, double> residual_quasi_commuting{0.0, 0.0};
    std::vector<EigenvalueEntry> eigenvalues;
    Verdict verdict = Verdict::degenerate;
    std::optional<InstabilityWitness> witness;
};

/// max(|A E^T - E E^T|, |E^T A - E^T E|); zero exactly at equilibria.
double equilibrium_residual(const DenseMatrix& a, const DenseMatrix& e);

/// (|A E^T - E A^T|, |A^T E - E^T A|); both zero at any equilibrium.
std::pair<double, double> quasi_commuting_residual(const DenseMatrix& a, const DenseMatrix& e);

/// Linearization of the flow's field at an equilibrium E, applied to X:
/// (A-E)X^T E + E X^T (A-E) - X E^T E - E E^T X. Valid as the flow's
/// derivative only where E is an equilibrium; a residual above 1e-8 relative
/// logs a warning.
DenseMatrix linearization_apply(const DenseMatrix& a, const DenseMatrix& e, const DenseMatrix& x);

/// Matrix of linearization_apply restricted to the span of the given
/// elementary tangent basis (columns ordered like `basis`). Symmetric, since
/// the elementary basis is orthonormal and the map is self-adjoint.
DenseMatrix linearization_matrix(const DenseMatrix& a, const DenseMatrix& e,
                                 std::span<const BasisIndex> basis);

/// Closed-form eigenvalues of the linearization at Diag(e) for target
/// spectrum sigma inside m-by-n (m >= n = len(sigma)), one entry per tangent
/// basis direction:
///   - 2 e_i (sigma_i - 2 e_i) at E^{ii} for i in the support,
///   - -(e_i^2+e_j^2) +- [(sigma_i-e_i)e_j + e_i(sigma_j-e_j)] on the
///     E^{ij} +- E^{ji} pair for i < j <= n touching the support,
///   - -e_q^2 at E^{pq} for rows p > n, q in the support.
/// Requires every e_i to be exactly sigma_i or 0.
std::vector<EigenvalueEntry> linearization_eigenvalues(std::span<const double> sigma,
                                                       std::span<const double> e, std::size_t m);

/// Full report for the equilibrium with diagonal e: residuals, closed-form
/// eigenvalues, verdict, and (when unstable) a witness direction. Wide
/// problems (m < n) are analyzed through their transpose, with descriptor
/// indices mirrored back.
EquilibriumReport classify(const SingularSpectrum& spectrum, std::span<const double> e);

/// All C(l, k) equilibria of the flow for a target with the given spectrum
/// (l = min(m, n)), each classified. Requires distinct positive singular
/// values; enumeration is capped at 200000 subsets.
std::vector<EquilibriumReport> enumerate_equilibria(const SingularSpectrum& spectrum,
                                                    std::size_t k);

/// Rotates X into the target-aligned frame (u^T X v) and matches it against
/// the equilibrium set; returns the classified equilibrium within Frobenius
/// distance tol, if any. Degenerate spectra never match.
std::optional<EquilibriumReport> match_to_equilibrium(const SingularSpectrum& spectrum,
                                                      const DenseMatrix& x, double tol);

/// Relative gap threshold used by the genericity checks in this module.
constexpr double kDistinctRelGap = 1e-8;

}  // namespace rankflow
