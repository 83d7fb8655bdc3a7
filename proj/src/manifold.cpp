#include "rankflow/manifold.hpp"

#include <algorithm>

namespace rankflow {

DenseMatrix tangent_map(const DenseMatrix& b, const TangentPair& p) {
    if (p.left.rows() != p.left.cols() || p.left.rows() != b.rows()) {
        throw shape_error("tangent_map: left factor must be " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.rows()));
    }
    if (p.right.rows() != p.right.cols() || p.right.rows() != b.cols()) {
        throw shape_error("tangent_map: right factor must be " + std::to_string(b.cols()) + "x" +
                          std::to_string(b.cols()));
    }
    return p.left * b + b * p.right;
}

TangentPair tangent_adjoint(const DenseMatrix& b, const DenseMatrix& z) {
    require_same_shape(b, z, "tangent_adjoint");
    return TangentPair{z * b.transpose(), b.transpose() * z};
}

DenseMatrix quasi_project(const DenseMatrix& b, const DenseMatrix& z) {
    return tangent_map(b, tangent_adjoint(b, z));
}

std::size_t tangent_dim(std::size_t m, std::size_t n, std::size_t k) {
    if (k > std::min(m, n)) throw domain_error("tangent_dim: k exceeds min(m, n)");
    return k * k + k * (m - k) + k * (n - k);
}

std::vector<BasisIndex> tangent_basis_at_diagonal(std::span<const double> e, std::size_t m) {
    const std::size_t n = e.size();
    std::vector<BasisIndex> basis;
    for (std::size_t p = 1; p <= m; ++p) {
        const double ep = (p <= n) ? e[p - 1] : 0.0;
        for (std::size_t q = 1; q <= n; ++q) {
            if (ep != 0.0 || e[q - 1] != 0.0) basis.push_back({p, q});
        }
    }
    return basis;
}

DenseMatrix operator_matrix(const std::function<DenseMatrix(const DenseMatrix&)>& op,
                            std::size_t m, std::size_t n) {
    const std::size_t dim = m * n;
    DenseMatrix out(dim, dim);
    for (std::size_t p = 0; p < m; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            const DenseMatrix image = op(DenseMatrix::unit(m, n, p, q));
            if (image.rows() != m || image.cols() != n) {
                throw shape_error("operator_matrix: operator changed shape");
            }
            const std::size_t col = p * n + q;
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) out(i * n + j, col) = image(i, j);
        }
    }
    return out;
}

}  // namespace rankflow
