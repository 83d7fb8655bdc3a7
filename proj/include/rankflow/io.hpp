#pragma once

#include <filesystem>
#include <string>

#include "rankflow/integrator.hpp"
#include "rankflow/matrix.hpp"

namespace rankflow {

/// Thrown for unreadable or ill-formed matrix files.
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reads a matrix from CSV: one row per line, comma-separated decimal
/// entries. An optional leading "# rows cols" header is accepted and
/// ignored. Rejects ragged rows and non-finite entries.
DenseMatrix read_matrix_csv(const std::filesystem::path& path);

/// Writes a matrix as CSV with 17 significant digits (round-trip exact).
void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& m);

/// Formats a double with full round-trip precision.
std::string format_double(double x);

/// Writes the trajectory diagnostics as CSV with header
/// t,f,grad_norm,numerical_rank,dist_to_oracle; `oracle` is the truncated-SVD
/// optimum distances are measured against.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory,
                          const DenseMatrix& oracle);

}  // namespace rankflow
