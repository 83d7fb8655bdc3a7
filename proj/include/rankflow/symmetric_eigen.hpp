#pragma once

#include <vector>

#include "rankflow/matrix.hpp"

namespace rankflow {

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// ascending. The input is symmetrized as (A + A^T)/2 before iterating;
/// callers that care about asymmetry should check it themselves.
std::vector<double> symmetric_eigenvalues(const DenseMatrix& a);

}  // namespace rankflow
