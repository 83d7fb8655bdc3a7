#include "rankflow/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rankflow {

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> values, std::size_t rows, std::size_t cols) {
    if (values.size() > std::min(rows, cols)) {
        throw shape_error("diagonal: " + std::to_string(values.size()) + " values do not fit a " +
                          std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
    }
    DenseMatrix m(rows, cols);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw domain_error("diagonal: non-finite entry");
        m(i, i) = values[i];
    }
    return m;
}

DenseMatrix DenseMatrix::unit(std::size_t rows, std::size_t cols, std::size_t row, std::size_t col) {
    if (row >= rows || col >= cols) throw shape_error("unit: index out of range");
    DenseMatrix m(rows, cols);
    m(row, col) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    std::vector<std::vector<double>> copy;
    copy.reserve(rows.size());
    for (const auto& r : rows) copy.emplace_back(r);
    return from_rows(copy);
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.front().empty()) throw shape_error("from_rows: empty matrix");
    const std::size_t n = rows.front().size();
    DenseMatrix m(rows.size(), n);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != n) throw shape_error("from_rows: ragged rows");
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::isfinite(rows[i][j])) throw domain_error("from_rows: non-finite entry");
            m(i, j) = rows[i][j];
        }
    }
    return m;
}

bool DenseMatrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

DenseMatrix DenseMatrix::transpose() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& rhs) {
    require_same_shape(*this, rhs, "operator+");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
    return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& rhs) {
    require_same_shape(*this, rhs, "operator-");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
    return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
}

DenseMatrix operator*(const DenseMatrix& lhs, const DenseMatrix& rhs) {
    if (lhs.cols() != rhs.rows()) {
        throw shape_error("operator*: " + shape_string(lhs) + " x " + shape_string(rhs));
    }
    DenseMatrix out(lhs.rows(), rhs.cols());
    for (std::size_t i = 0; i < lhs.rows(); ++i) {
        for (std::size_t l = 0; l < lhs.cols(); ++l) {
            const double a = lhs(i, l);
            if (a == 0.0) continue;
            for (std::size_t j = 0; j < rhs.cols(); ++j) out(i, j) += a * rhs(l, j);
        }
    }
    return out;
}

double DenseMatrix::max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
}

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw shape_error(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " +
                          shape_string(b));
    }
}

std::string shape_string(const DenseMatrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

DenseMatrix lu_solve(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != a.cols()) throw shape_error("lu_solve: matrix not square");
    if (a.rows() != b.rows()) throw shape_error("lu_solve: rhs rows mismatch");
    const std::size_t n = a.rows();
    DenseMatrix lu = a;
    DenseMatrix x = b;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::abs(lu(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::abs(lu(r, col));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best == 0.0) throw domain_error("lu_solve: singular matrix");
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(col, j), lu(piv, j));
            for (std::size_t j = 0; j < x.cols(); ++j) std::swap(x(col, j), x(piv, j));
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = lu(r, col) / lu(col, col);
            lu(r, col) = factor;
            for (std::size_t j = col + 1; j < n; ++j) lu(r, j) -= factor * lu(col, j);
            for (std::size_t j = 0; j < x.cols(); ++j) x(r, j) -= factor * x(col, j);
        }
    }
    for (std::size_t col = n; col-- > 0;) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            x(col, j) /= lu(col, col);
            for (std::size_t r = 0; r < col; ++r) x(r, j) -= lu(r, col) * x(col, j);
        }
    }
    return x;
}

}  // namespace rankflow
