#include "rankflow/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "rankflow/frobenius.hpp"

namespace rankflow {

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

DenseMatrix read_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (first && !line.empty() && line.front() == '#') {
            first = false;
            continue;
        }
        first = false;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            std::size_t pos = 0;
            double value = 0.0;
            try {
                value = std::stod(cell, &pos);
            } catch (const std::exception&) {
                throw io_error(path.string() + ": cannot parse entry '" + cell + "'");
            }
            while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
            if (pos != cell.size()) {
                throw io_error(path.string() + ": trailing characters in entry '" + cell + "'");
            }
            if (!std::isfinite(value)) {
                throw io_error(path.string() + ": non-finite entry '" + cell + "'");
            }
            row.push_back(value);
        }
        if (row.empty()) throw io_error(path.string() + ": empty row");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw io_error(path.string() + ": no data");
    const std::size_t n = rows.front().size();
    for (const auto& row : rows) {
        if (row.size() != n) throw io_error(path.string() + ": ragged rows");
    }
    return DenseMatrix::from_rows(rows);
}

void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& m) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j > 0) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
    if (!out) throw io_error("write failed: " + path.string());
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory,
                          const DenseMatrix& oracle) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    out << "t,f,grad_norm,numerical_rank,dist_to_oracle\n";
    for (const TrajectorySample& s : trajectory.samples) {
        out << format_double(s.t) << ',' << format_double(s.f) << ','
            << format_double(s.grad_norm) << ',' << s.numerical_rank << ','
            << format_double(frob_norm(s.x - oracle)) << '\n';
    }
    if (!out) throw io_error("write failed: " + path.string());
}

}  // namespace rankflow
