#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <memory>
#include <span>
#include <vector>

namespace stabrb {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within a row and no explicitly stored zeros survive construction.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols);

  /// Duplicates are summed; entries that sum to exactly zero are dropped.
  static SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> triplets);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  const std::vector<int>& row_offsets() const { return row_offsets_; }
  const std::vector<int>& column_indices() const { return column_indices_; }
  const std::vector<double>& values() const { return values_; }

  double coeff(int row, int col) const;

  Vector multiply(const Vector& x) const;
  Vector multiply_transpose(const Vector& x) const;
  DenseMatrix multiply(const DenseMatrix& x) const;

  SparseMatrix transpose() const;
  SparseMatrix scaled(double s) const;
  double frobenius_norm() const;
  bool is_symmetric(double tol) const;

  Eigen::SparseMatrix<double> to_eigen() const;
  DenseMatrix to_dense() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_offsets_{0};
  std::vector<int> column_indices_;
  std::vector<double> values_;
};

/// sum_i coeffs[i] * matrices[i]; all matrices must share a shape.
SparseMatrix linear_combination(std::span<const double> coeffs,
                                std::span<const SparseMatrix* const> matrices);

/// Sparse LU factorisation with partial pivoting and COLAMD ordering.
///
/// Construction throws `SingularMatrix` when a zero pivot is met or when the
/// smallest pivot falls below `singular_tol` times the largest one.
class SparseLu {
 public:
  explicit SparseLu(const SparseMatrix& m, double singular_tol = 1e-13);
  ~SparseLu();
  SparseLu(SparseLu&&) noexcept;
  SparseLu& operator=(SparseLu&&) noexcept;

  /// Solve with one step of iterative refinement.
  Vector solve(const Vector& rhs) const;
  DenseMatrix solve(const DenseMatrix& rhs) const;

  int size() const { return n_; }
  double pivot_ratio() const { return pivot_ratio_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  SparseMatrix matrix_;
  int n_ = 0;
  double pivot_ratio_ = 1.0;
};

Vector sparse_lu_solve(const SparseMatrix& m, const Vector& rhs);

/// Dense solve that reports (numerical) singularity instead of returning junk.
Vector dense_solve(const DenseMatrix& m, const Vector& rhs, const char* context = "dense solve");

/// Result of Gram-Schmidt: orthonormal vectors plus the input positions that
/// were dropped as linearly dependent.
struct GramSchmidtResult {
  std::vector<Vector> basis;
  std::vector<int> dropped;
};

/// Incrementally built basis, orthonormal in the inner product `gram`.
/// Each new vector gets modified Gram-Schmidt followed by one classical
/// re-orthogonalisation pass; it is dropped when its remaining norm is below
/// `drop_tol` times the norm of the first vector ever offered.
class OrthonormalBasis {
 public:
  OrthonormalBasis(const SparseMatrix& gram, double drop_tol = 1e-10);

  /// Orthonormalise against the current basis (and `against`, if given);
  /// returns false when the vector is dropped.
  bool append(const Vector& v, const std::vector<Vector>* against = nullptr);

  const std::vector<Vector>& vectors() const { return basis_; }
  std::size_t size() const { return basis_.size(); }
  DenseMatrix as_matrix(int rows) const;

 private:
  const SparseMatrix* gram_;
  double drop_tol_;
  double reference_norm_ = -1.0;
  std::vector<Vector> basis_;
};

GramSchmidtResult modified_gram_schmidt(const std::vector<Vector>& vectors,
                                        const SparseMatrix& inner_product,
                                        double drop_tol = 1e-10);

/// Smallest generalised singular value
///   min_q sqrt(q^T B Xu^{-1} B^T q / q^T Xp q).
double smallest_gsv(const DenseMatrix& B, const DenseMatrix& Xu, const DenseMatrix& Xp);

/// Dense rank-3 array, row-major: T(i, j, k) at (i * n1 + j) * n2 + k.
class DenseTensor3 {
 public:
  DenseTensor3() = default;
  DenseTensor3(int n0, int n1, int n2);

  int dim(int axis) const { return axis == 0 ? n0_ : axis == 1 ? n1_ : n2_; }
  double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
  double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  /// out_i = sum_jk T(i,j,k) x_j y_k
  Vector contract(const Vector& x, const Vector& y) const;
  /// M(i,k) = sum_j T(i,j,k) x_j
  DenseMatrix contract_first(const Vector& x) const;
  /// M(i,j) = sum_k T(i,j,k) y_k
  DenseMatrix contract_second(const Vector& y) const;

  DenseTensor3 slice(std::span<const int> i0, std::span<const int> i1,
                     std::span<const int> i2) const;
  void axpy(double a, const DenseTensor3& other);

 private:
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * static_cast<std::size_t>(n1_) +
            static_cast<std::size_t>(j)) * static_cast<std::size_t>(n2_) + static_cast<std::size_t>(k);
  }
  int n0_ = 0, n1_ = 0, n2_ = 0;
  std::vector<double> data_;
};

}  // namespace stabrb
