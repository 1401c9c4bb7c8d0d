#include "stabrb/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>

#include "stabrb/errors.hpp"

namespace stabrb {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& echo,
                     const std::vector<std::string>& header)
    : out_(out), columns_(header.size()) {
  for (const auto& [k, v] : echo) out_ << "# " << k << " = " << v << "\r\n";
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << csv_escape(header[i]);
  out_ << "\r\n";
}

CsvWriter& CsvWriter::field(const std::string& s) {
  if (current_ == columns_) throw InvalidArgument("csv: too many fields in row");
  out_ << (current_++ ? "," : "") << csv_escape(s);
  return *this;
}

CsvWriter& CsvWriter::field(double v) { return field(format_number(v)); }
CsvWriter& CsvWriter::field(long long v) { return field(std::to_string(v)); }

void CsvWriter::end_row() {
  if (current_ != columns_) throw InvalidArgument("csv: row has " + std::to_string(current_) + " of " + std::to_string(columns_) + " fields");
  out_ << "\r\n";
  current_ = 0;
}

void write_vtk(std::ostream& out, const HighFidelityModel& hf, const FeSolution& s, const std::string& title) {
  const Mesh& mesh = hf.mesh();
  const int nv = mesh.n_vertices(), nt = mesh.n_triangles();
  const FeFunction velocity(hf.velocity_space(), s.total_velocity());
  std::vector<std::array<double, 2>> u(static_cast<std::size_t>(nv));
  std::vector<double> p(static_cast<std::size_t>(nv), 0.0), pc(static_cast<std::size_t>(nt), 0.0);
  const bool cell_pressure = hf.pressure_space()->family() == Family::P0;
  for (int k = 0; k < nt; ++k) {
    const auto& t = mesh.triangles()[static_cast<std::size_t>(k)];
    for (int i = 0; i < 3; ++i) {
      std::array<double, 3> l{0, 0, 0};
      l[static_cast<std::size_t>(i)] = 1.0;
      const auto v = static_cast<std::size_t>(t[static_cast<std::size_t>(i)]);
      const auto uv = eval_local(velocity, k, l);
      u[v] = {uv[0], uv[1]};
      if (!cell_pressure) p[v] = eval_local(s.pressure, k, l)[0];
    }
    if (cell_pressure) pc[static_cast<std::size_t>(k)] = eval_local(s.pressure, k, {1.0 / 3, 1.0 / 3, 1.0 / 3})[0];
  }

  std::string head = title;
  for (char& c : head)
    if (c == '\n' || c == '\r') c = ' ';
  if (head.size() > 255) head.resize(255);
  out << "# vtk DataFile Version 3.0\n" << head << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nv << " double\n";
  for (const Vec2& x : mesh.vertices()) out << format_number(x.x) << ' ' << format_number(x.y) << " 0\n";
  out << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << nt << '\n';
  for (int k = 0; k < nt; ++k) out << "5\n";
  out << "POINT_DATA " << nv << "\nVECTORS velocity double\n";
  for (const auto& v : u) out << format_number(v[0]) << ' ' << format_number(v[1]) << " 0\n";
  if (!cell_pressure) {
    out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (double v : p) out << format_number(v) << '\n';
  } else {
    out << "CELL_DATA " << nt << "\nSCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (double v : pc) out << format_number(v) << '\n';
  }
}

void write_matrix_market(std::ostream& out, const SparseMatrix& m) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  const auto e = m.to_eigen();
  out << e.rows() << ' ' << e.cols() << ' ' << e.nonZeros() << '\n';
  for (int k = 0; k < e.outerSize(); ++k)
    for (decltype(e)::InnerIterator it(e, k); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << format_number(it.value()) << '\n';
}

void write_matrix_market(std::ostream& out, const DenseMatrix& m) {
  out << "%%MatrixMarket matrix array real general\n" << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) out << format_number(m(i, j)) << '\n';
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw InvalidArgument("cannot create directory '" + path + "': " + ec.message());
}

}  // namespace stabrb
