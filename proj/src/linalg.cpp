#include "stabrb/linalg.hpp"

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cstdio>
#include <cmath>
#include <string>

#include "stabrb/errors.hpp"

namespace stabrb {

// ---------------------------------------------------------------- SparseMatrix

SparseMatrix::SparseMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), row_offsets_(static_cast<std::size_t>(rows) + 1, 0) {}

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::vector<Triplet> t) {
  std::stable_sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m(rows, cols);
  m.column_indices_.reserve(t.size());
  m.values_.reserve(t.size());
  std::size_t i = 0;
  while (i < t.size()) {
    const Triplet& first = t[i];
    if (first.row < 0 || first.row >= rows || first.col < 0 || first.col >= cols) {
      throw InvalidArgument("SparseMatrix: triplet index out of range");
    }
    double sum = 0.0;
    std::size_t j = i;
    for (; j < t.size() && t[j].row == first.row && t[j].col == first.col; ++j) sum += t[j].value;
    if (sum != 0.0) {
      m.column_indices_.push_back(first.col);
      m.values_.push_back(sum);
      ++m.row_offsets_[static_cast<std::size_t>(first.row) + 1];
    }
    i = j;
  }
  for (int r = 0; r < rows; ++r) {
    m.row_offsets_[static_cast<std::size_t>(r) + 1] += m.row_offsets_[static_cast<std::size_t>(r)];
  }
  return m;
}

double SparseMatrix::coeff(int row, int col) const {
  const auto begin = column_indices_.begin() + row_offsets_[static_cast<std::size_t>(row)];
  const auto end = column_indices_.begin() + row_offsets_[static_cast<std::size_t>(row) + 1];
  const auto it = std::lower_bound(begin, end, col);
  if (it == end || *it != col) return 0.0;
  return values_[static_cast<std::size_t>(it - column_indices_.begin())];
}

Vector SparseMatrix::multiply(const Vector& x) const {
  if (x.size() != cols_) throw InvalidArgument("SparseMatrix::multiply: size mismatch");
  Vector y(rows_);
  for (int r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (int p = row_offsets_[static_cast<std::size_t>(r)]; p < row_offsets_[static_cast<std::size_t>(r) + 1]; ++p) {
      s += values_[static_cast<std::size_t>(p)] * x[column_indices_[static_cast<std::size_t>(p)]];
    }
    y[r] = s;
  }
  return y;
}

Vector SparseMatrix::multiply_transpose(const Vector& x) const {
  if (x.size() != rows_) throw InvalidArgument("SparseMatrix::multiply_transpose: size mismatch");
  Vector y = Vector::Zero(cols_);
  for (int r = 0; r < rows_; ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    for (int p = row_offsets_[static_cast<std::size_t>(r)]; p < row_offsets_[static_cast<std::size_t>(r) + 1]; ++p) {
      y[column_indices_[static_cast<std::size_t>(p)]] += values_[static_cast<std::size_t>(p)] * xr;
    }
  }
  return y;
}

DenseMatrix SparseMatrix::multiply(const DenseMatrix& x) const {
  if (x.rows() != cols_) throw InvalidArgument("SparseMatrix::multiply: size mismatch");
  DenseMatrix y = DenseMatrix::Zero(rows_, x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (int r = 0; r < rows_; ++r) {
      double s = 0.0;
      for (int p = row_offsets_[static_cast<std::size_t>(r)]; p < row_offsets_[static_cast<std::size_t>(r) + 1]; ++p) {
        s += values_[static_cast<std::size_t>(p)] * x(column_indices_[static_cast<std::size_t>(p)], c);
      }
      y(r, c) = s;
    }
  }
  return y;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (int r = 0; r < rows_; ++r) {
    for (int p = row_offsets_[static_cast<std::size_t>(r)]; p < row_offsets_[static_cast<std::size_t>(r) + 1]; ++p) {
      t.push_back({column_indices_[static_cast<std::size_t>(p)], r, values_[static_cast<std::size_t>(p)]});
    }
  }
  return from_triplets(cols_, rows_, std::move(t));
}

SparseMatrix SparseMatrix::scaled(double s) const {
  if (s == 0.0) return SparseMatrix(rows_, cols_);
  SparseMatrix m = *this;
  for (double& v : m.values_) v *= s;
  return m;
}

double SparseMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

bool SparseMatrix::is_symmetric(double tol) const {
  if (rows_ != cols_) return false;
  const double scale = std::max(frobenius_norm(), 1e-300);
  for (int r = 0; r < rows_; ++r) {
    for (int p = row_offsets_[static_cast<std::size_t>(r)]; p < row_offsets_[static_cast<std::size_t>(r) + 1]; ++p) {
      const int c = column_indices_[static_cast<std::size_t>(p)];
      if (std::abs(values_[static_cast<std::size_t>(p)] - coeff(c, r)) > tol * scale) return false;
    }
  }
  return true;
}

Eigen::SparseMatrix<double> SparseMatrix::to_eigen() const {
  Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor>> view(
      rows_, cols_, static_cast<Eigen::Index>(nnz()), row_offsets_.data(), column_indices_.data(),
      values_.data());
  Eigen::SparseMatrix<double> out = view;
  out.makeCompressed();
  return out;
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d = DenseMatrix::Zero(rows_, cols_);
  for (int r = 0; r < rows_; ++r) {
    for (int p = row_offsets_[static_cast<std::size_t>(r)]; p < row_offsets_[static_cast<std::size_t>(r) + 1]; ++p) {
      d(r, column_indices_[static_cast<std::size_t>(p)]) = values_[static_cast<std::size_t>(p)];
    }
  }
  return d;
}

SparseMatrix linear_combination(std::span<const double> coeffs,
                                std::span<const SparseMatrix* const> matrices) {
  if (coeffs.size() != matrices.size() || matrices.empty()) {
    throw InvalidArgument("linear_combination: need one coefficient per matrix");
  }
  const int rows = matrices[0]->rows(), cols = matrices[0]->cols();
  std::size_t total = 0;
  for (const SparseMatrix* m : matrices) {
    if (m->rows() != rows || m->cols() != cols) {
      throw InvalidArgument("linear_combination: shape mismatch");
    }
    total += m->nnz();
  }
  std::vector<Triplet> t;
  t.reserve(total);
  for (std::size_t q = 0; q < matrices.size(); ++q) {
    const SparseMatrix& m = *matrices[q];
    if (coeffs[q] == 0.0) continue;
    for (int r = 0; r < rows; ++r) {
      for (int p = m.row_offsets()[static_cast<std::size_t>(r)]; p < m.row_offsets()[static_cast<std::size_t>(r) + 1]; ++p) {
        t.push_back({r, m.column_indices()[static_cast<std::size_t>(p)],
                     coeffs[q] * m.values()[static_cast<std::size_t>(p)]});
      }
    }
  }
  return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

// -------------------------------------------------------------------- SparseLu

struct SparseLu::Impl {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
};

SparseLu::SparseLu(const SparseMatrix& m, double singular_tol)
    : impl_(std::make_unique<Impl>()), matrix_(m), n_(m.rows()) {
  if (m.rows() != m.cols()) throw InvalidArgument("SparseLu: matrix must be square");
  const Eigen::SparseMatrix<double> e = m.to_eigen();
  impl_->lu.analyzePattern(e);
  impl_->lu.factorize(e);
  if (impl_->lu.info() != Eigen::Success) {
    const std::string msg = impl_->lu.lastErrorMessage();
    long pivot = -1;
    const auto pos = msg.find_last_of(' ');
    if (pos != std::string::npos) {
      try {
        pivot = std::stol(msg.substr(pos + 1));
      } catch (...) {
      }
    }
    throw SingularMatrix("singular matrix: zero pivot at row " + std::to_string(pivot), pivot);
  }
  // Diagonal blocks of U live in the supernodal L storage.
  using SCMatrix = decltype(impl_->lu)::SCMatrix;
  const auto lret = impl_->lu.matrixL();
  double max_pivot = 0.0, min_pivot = std::numeric_limits<double>::infinity();
  long min_index = -1;
  for (Eigen::Index j = 0; j < n_; ++j) {
    for (SCMatrix::InnerIterator it(lret.m_mapL, j); it; ++it) {
      if (it.index() == j) {
        const double v = std::abs(it.value());
        max_pivot = std::max(max_pivot, v);
        if (v < min_pivot) {
          min_pivot = v;
          min_index = static_cast<long>(j);
        }
        break;
      }
    }
  }
  pivot_ratio_ = max_pivot > 0.0 ? min_pivot / max_pivot : 0.0;
  if (n_ > 0 && pivot_ratio_ < singular_tol) {
    const long row = min_index >= 0 ? static_cast<long>(impl_->lu.colsPermutation().indices()[min_index]) : -1;
    char ratio[32];
    std::snprintf(ratio, sizeof ratio, "%.3e", pivot_ratio_);
    throw SingularMatrix("singular matrix: pivot ratio " + std::string(ratio) + " at row " + std::to_string(row), row);
  }
}

SparseLu::~SparseLu() = default;
SparseLu::SparseLu(SparseLu&&) noexcept = default;
SparseLu& SparseLu::operator=(SparseLu&&) noexcept = default;

Vector SparseLu::solve(const Vector& rhs) const {
  if (rhs.size() != n_) throw InvalidArgument("SparseLu::solve: size mismatch");
  Vector x = impl_->lu.solve(rhs);
  const Vector r = rhs - matrix_.multiply(x);
  x += impl_->lu.solve(r);
  return x;
}

DenseMatrix SparseLu::solve(const DenseMatrix& rhs) const {
  DenseMatrix x(rhs.rows(), rhs.cols());
  for (Eigen::Index c = 0; c < rhs.cols(); ++c) x.col(c) = solve(Vector(rhs.col(c)));
  return x;
}

Vector sparse_lu_solve(const SparseMatrix& m, const Vector& rhs) { return SparseLu(m).solve(rhs); }

Vector dense_solve(const DenseMatrix& m, const Vector& rhs, const char* context) {
  if (m.rows() != m.cols() || m.rows() != rhs.size()) {
    throw InvalidArgument(std::string(context) + ": size mismatch");
  }
  if (m.rows() == 0) return Vector();
  Eigen::FullPivLU<DenseMatrix> lu(m);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) {
    throw SingularMatrix(std::string(context) + ": singular reduced matrix (rank " +
                             std::to_string(lu.rank()) + " of " + std::to_string(m.rows()) + ")",
                         static_cast<long>(lu.rank()));
  }
  Vector x = lu.solve(rhs);
  x += lu.solve(Vector(rhs - m * x));
  return x;
}

// ---------------------------------------------------------------- Gram-Schmidt

OrthonormalBasis::OrthonormalBasis(const SparseMatrix& gram, double drop_tol)
    : gram_(&gram), drop_tol_(drop_tol) {}

bool OrthonormalBasis::append(const Vector& v, const std::vector<Vector>* against) {
  const auto norm = [this](const Vector& x) { return std::sqrt(std::max(x.dot(gram_->multiply(x)), 0.0)); };
  if (reference_norm_ < 0.0) reference_norm_ = norm(v);
  Vector w = v;
  // Modified Gram-Schmidt sweep, then one classical pass.
  for (int pass = 0; pass < 2; ++pass) {
    if (against) {
      for (const Vector& z : *against) w -= z.dot(gram_->multiply(w)) * z;
    }
    if (pass == 0) {
      for (const Vector& z : basis_) w -= z.dot(gram_->multiply(w)) * z;
    } else {
      const Vector gw = gram_->multiply(w);
      Vector correction = Vector::Zero(w.size());
      for (const Vector& z : basis_) correction += z.dot(gw) * z;
      w -= correction;
    }
  }
  const double n = norm(w);
  if (!(n > drop_tol_ * reference_norm_) || n == 0.0) return false;
  basis_.push_back(w / n);
  return true;
}

DenseMatrix OrthonormalBasis::as_matrix(int rows) const {
  DenseMatrix z(rows, static_cast<Eigen::Index>(basis_.size()));
  for (std::size_t i = 0; i < basis_.size(); ++i) z.col(static_cast<Eigen::Index>(i)) = basis_[i];
  return z;
}

GramSchmidtResult modified_gram_schmidt(const std::vector<Vector>& vectors,
                                        const SparseMatrix& inner_product, double drop_tol) {
  OrthonormalBasis basis(inner_product, drop_tol);
  GramSchmidtResult out;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (!basis.append(vectors[i])) out.dropped.push_back(static_cast<int>(i));
  }
  out.basis = basis.vectors();
  return out;
}

// ------------------------------------------------------------------- inf-sup

double smallest_gsv(const DenseMatrix& B, const DenseMatrix& Xu, const DenseMatrix& Xp) {
  if (B.rows() != Xp.rows() || B.cols() != Xu.rows() || Xu.rows() != Xu.cols() ||
      Xp.rows() != Xp.cols()) {
    throw InvalidArgument("smallest_gsv: shape mismatch");
  }
  if (B.rows() == 0) throw InvalidArgument("smallest_gsv: empty pressure space");
  Eigen::LLT<DenseMatrix> xu(Xu);
  Eigen::LLT<DenseMatrix> xp(Xp);
  if (xu.info() != Eigen::Success || xp.info() != Eigen::Success) {
    throw InvalidArgument("smallest_gsv: Gram matrix is not symmetric positive definite");
  }
  DenseMatrix m = B * xu.solve(DenseMatrix(B.transpose()));
  m = 0.5 * (m + m.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> eig(m, Xp, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(eig.eigenvalues()[0], 0.0));
}

// --------------------------------------------------------------- DenseTensor3

DenseTensor3::DenseTensor3(int n0, int n1, int n2)
    : n0_(n0), n1_(n1), n2_(n2),
      data_(static_cast<std::size_t>(n0) * static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2), 0.0) {}

Vector DenseTensor3::contract(const Vector& x, const Vector& y) const {
  Vector out = Vector::Zero(n0_);
  for (int i = 0; i < n0_; ++i) {
    double s = 0.0;
    for (int j = 0; j < n1_; ++j) {
      const double* row = &data_[index(i, j, 0)];
      double t = 0.0;
      for (int k = 0; k < n2_; ++k) t += row[k] * y[k];
      s += x[j] * t;
    }
    out[i] = s;
  }
  return out;
}

DenseMatrix DenseTensor3::contract_first(const Vector& x) const {
  DenseMatrix m = DenseMatrix::Zero(n0_, n2_);
  for (int i = 0; i < n0_; ++i) {
    for (int j = 0; j < n1_; ++j) {
      const double xj = x[j];
      const double* row = &data_[index(i, j, 0)];
      for (int k = 0; k < n2_; ++k) m(i, k) += xj * row[k];
    }
  }
  return m;
}

DenseMatrix DenseTensor3::contract_second(const Vector& y) const {
  DenseMatrix m = DenseMatrix::Zero(n0_, n1_);
  for (int i = 0; i < n0_; ++i) {
    for (int j = 0; j < n1_; ++j) {
      const double* row = &data_[index(i, j, 0)];
      double t = 0.0;
      for (int k = 0; k < n2_; ++k) t += row[k] * y[k];
      m(i, j) = t;
    }
  }
  return m;
}

DenseTensor3 DenseTensor3::slice(std::span<const int> i0, std::span<const int> i1,
                                 std::span<const int> i2) const {
  DenseTensor3 out(static_cast<int>(i0.size()), static_cast<int>(i1.size()),
                   static_cast<int>(i2.size()));
  for (std::size_t a = 0; a < i0.size(); ++a) {
    for (std::size_t b = 0; b < i1.size(); ++b) {
      for (std::size_t c = 0; c < i2.size(); ++c) {
        out(static_cast<int>(a), static_cast<int>(b), static_cast<int>(c)) = (*this)(i0[a], i1[b], i2[c]);
      }
    }
  }
  return out;
}

void DenseTensor3::axpy(double a, const DenseTensor3& other) {
  if (other.n0_ != n0_ || other.n1_ != n1_ || other.n2_ != n2_) {
    throw InvalidArgument("DenseTensor3::axpy: shape mismatch");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * other.data_[i];
}

}  // namespace stabrb
