#pragma once

#include "rankflow/matrix.hpp"

namespace rankflow {

/// A pair (left, right) with left m-by-m and right n-by-n; the domain of the
/// tangent map at an m-by-n point and the range of its adjoint.
struct TangentPair {
    DenseMatrix left;
    DenseMatrix right;
};

/// Frobenius inner product <X,Y> = Trace(X Y^T) = sum_ij X_ij Y_ij.
double inner(const DenseMatrix& x, const DenseMatrix& y);

/// sqrt(<X,X>).
double frob_norm(const DenseMatrix& x);

/// Product inner product on pairs: <(X1,Y1),(X2,Y2)> = <X1,X2> + <Y1,Y2>.
double pair_inner(const TangentPair& p, const TangentPair& q);

}  // namespace rankflow
