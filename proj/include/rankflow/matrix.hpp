#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rankflow {

/// Thrown when operand dimensions do not conform.
class shape_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a scalar/integer argument is outside its admissible range.
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Thrown when a genericity hypothesis (distinct positive singular values) fails.
class degeneracy_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when a caller violates a documented precondition.
class precondition_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dense real matrix, row-major storage.
///
/// The carrier type for every matrix in the library (targets, flow states,
/// equilibria, tangent vectors, orthogonal factors). Entries are doubles;
/// constructors that ingest external data reject NaN/Inf.
class DenseMatrix {
public:
    DenseMatrix() = default;

    DenseMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    static DenseMatrix zero(std::size_t rows, std::size_t cols) { return DenseMatrix(rows, cols); }

    static DenseMatrix identity(std::size_t n);

    /// m-by-n matrix with `values` on the main diagonal, zeros elsewhere.
    static DenseMatrix diagonal(std::span<const double> values, std::size_t rows, std::size_t cols);

    /// m-by-n matrix whose single nonzero entry is a one at (row, col), zero-based.
    static DenseMatrix unit(std::size_t rows, std::size_t cols, std::size_t row, std::size_t col);

    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    bool same_shape(const DenseMatrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool all_finite() const;

    DenseMatrix transpose() const;

    DenseMatrix& operator+=(const DenseMatrix& rhs);
    DenseMatrix& operator-=(const DenseMatrix& rhs);
    DenseMatrix& operator*=(double s);

    friend DenseMatrix operator+(DenseMatrix lhs, const DenseMatrix& rhs) { return lhs += rhs; }
    friend DenseMatrix operator-(DenseMatrix lhs, const DenseMatrix& rhs) { return lhs -= rhs; }
    friend DenseMatrix operator*(DenseMatrix m, double s) { return m *= s; }
    friend DenseMatrix operator*(double s, DenseMatrix m) { return m *= s; }
    friend DenseMatrix operator-(DenseMatrix m) { return m *= -1.0; }

    /// Matrix product; throws shape_error on nonconforming operands.
    friend DenseMatrix operator*(const DenseMatrix& lhs, const DenseMatrix& rhs);

    friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    double max_abs() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op);

std::string shape_string(const DenseMatrix& m);

/// Solves A X = B by LU factorization with partial pivoting (A square).
/// Throws domain_error if a pivot underflows to zero.
DenseMatrix lu_solve(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace rankflow
