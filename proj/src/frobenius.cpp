#include "rankflow/frobenius.hpp"

#include <cmath>

namespace rankflow {

double inner(const DenseMatrix& x, const DenseMatrix& y) {
    require_same_shape(x, y, "inner");
    double acc = 0.0;
    const auto xd = x.data();
    const auto yd = y.data();
    for (std::size_t i = 0; i < xd.size(); ++i) acc += xd[i] * yd[i];
    return acc;
}

double frob_norm(const DenseMatrix& x) { return std::sqrt(inner(x, x)); }

double pair_inner(const TangentPair& p, const TangentPair& q) {
    return inner(p.left, q.left) + inner(p.right, q.right);
}

}  // namespace rankflow
