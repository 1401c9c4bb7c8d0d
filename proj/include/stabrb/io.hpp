#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "stabrb/hifi.hpp"
#include "stabrb/linalg.hpp"

namespace stabrb {

/// %.17g; non-finite values as inf, -inf, nan.
std::string format_number(double v);

/// RFC-4180 CSV with a leading block of `# key = value` comment lines.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& echo,
            const std::vector<std::string>& header);

  CsvWriter& field(const std::string& s);
  CsvWriter& field(double v);
  CsvWriter& field(long long v);
  CsvWriter& field(int v) { return field(static_cast<long long>(v)); }
  CsvWriter& field(std::size_t v) { return field(static_cast<long long>(v)); }
  void end_row();

 private:
  std::ostream& out_;
  std::size_t columns_;
  std::size_t current_ = 0;
};

std::string csv_escape(const std::string& s);

/// Legacy ASCII VTK unstructured grid of the mesh triangles with the total
/// velocity and the pressure at the vertices (cell data for P0 pressure).
/// Comment echo goes into the VTK title line.
void write_vtk(std::ostream& out, const HighFidelityModel& hf, const FeSolution& s, const std::string& title);

/// MatrixMarket coordinate real general.
void write_matrix_market(std::ostream& out, const SparseMatrix& m);
void write_matrix_market(std::ostream& out, const DenseMatrix& m);

/// Creates the directory (and parents) when missing.
void ensure_directory(const std::string& path);

}  // namespace stabrb
