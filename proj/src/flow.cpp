#include "rankflow/flow.hpp"

namespace rankflow {

double objective(const DenseMatrix& a, const DenseMatrix& x) {
    require_same_shape(a, x, "objective");
    const DenseMatrix d = x - a;
    return 0.5 * inner(d, d);
}

DenseMatrix gradient(const DenseMatrix& a, const DenseMatrix& x) {
    require_same_shape(a, x, "gradient");
    return x - a;
}

DenseMatrix vector_field(const DenseMatrix& a, const DenseMatrix& x) {
    require_same_shape(a, x, "vector_field");
    return quasi_project(x, a - x);
}

double lyapunov_rate(const DenseMatrix& a, const DenseMatrix& x) {
    require_same_shape(a, x, "lyapunov_rate");
    const TangentPair adj = tangent_adjoint(x, x - a);
    return -pair_inner(adj, adj);
}

DenseMatrix factor_field_g(const DenseMatrix& a, const DenseMatrix& x, const DenseMatrix& g) {
    require_same_shape(a, x, "factor_field_g");
    if (g.rows() != g.cols() || g.rows() != a.rows()) {
        throw shape_error("factor_field_g: G must be " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.rows()));
    }
    return (a - x) * x.transpose() * g;
}

DenseMatrix factor_field_h(const DenseMatrix& a, const DenseMatrix& x, const DenseMatrix& h) {
    require_same_shape(a, x, "factor_field_h");
    if (h.rows() != h.cols() || h.rows() != a.cols()) {
        throw shape_error("factor_field_h: H must be " + std::to_string(a.cols()) + "x" +
                          std::to_string(a.cols()));
    }
    return -(x.transpose() * ((a - x) * h));
}

}  // namespace rankflow
