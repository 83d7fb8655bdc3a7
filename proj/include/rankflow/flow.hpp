#pragma once

#include "rankflow/frobenius.hpp"
#include "rankflow/manifold.hpp"
#include "rankflow/matrix.hpp"

namespace rankflow {

/// A rank-constrained approximation problem: find the rank-k matrix closest
/// to `target` in the Frobenius norm.
struct FlowProblem {
    DenseMatrix target;
    std::size_t rank = 0;
};

/// Group factors (g, h) accumulated by the rank-certifying factor flows;
/// g is m-by-m, h is n-by-n, both invertible along the flow.
struct FactorPair {
    DenseMatrix g;
    DenseMatrix h;
};

/// f_A(X) = (1/2)<X-A, X-A>: half the squared distance from X to A.
double objective(const DenseMatrix& a, const DenseMatrix& x);

/// Gradient of f_A at X: X - A.
DenseMatrix gradient(const DenseMatrix& a, const DenseMatrix& x);

/// The flow's vector field F(X) = (A-X)X^T X + X X^T (A-X), the
/// quasi-projection of the negative gradient onto the tangent space at X.
DenseMatrix vector_field(const DenseMatrix& a, const DenseMatrix& x);

/// d/dt f_A(X(t)) along the flow: -<L_X^*(X-A), L_X^*(X-A)> <= 0.
double lyapunov_rate(const DenseMatrix& a, const DenseMatrix& x);

/// Factor flow field for G: (A-X)X^T G.
DenseMatrix factor_field_g(const DenseMatrix& a, const DenseMatrix& x, const DenseMatrix& g);

/// Factor flow field for H: -X^T(A-X) H.
DenseMatrix factor_field_h(const DenseMatrix& a, const DenseMatrix& x, const DenseMatrix& h);

}  // namespace rankflow
