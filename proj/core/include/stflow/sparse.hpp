#ifndef STFLOW_SPARSE_HPP
#define STFLOW_SPARSE_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace stflow {

/// Compressed-sparse-row matrix. Column indices are strictly increasing
/// within each row; duplicate triplets are summed on construction.
class SparseMatrix {
public:
  SparseMatrix() = default;
  SparseMatrix(int n_rows, int n_cols)
      : n_rows_(n_rows), n_cols_(n_cols), row_offsets_(n_rows + 1, 0) {}

  struct Triplet {
    int row;
    int col;
    double value;
  };

  static SparseMatrix from_triplets(int n_rows, int n_cols,
                                    std::vector<Triplet> triplets);
  static SparseMatrix identity(int n);

  int rows() const { return n_rows_; }
  int cols() const { return n_cols_; }
  std::size_t nnz() const { return values_.size(); }

  const std::vector<int>& row_offsets() const { return row_offsets_; }
  const std::vector<int>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// y = A x
  void mult(std::span<const double> x, std::span<double> y) const;
  /// y += alpha * A x
  void mult_add(std::span<const double> x, std::span<double> y,
                double alpha = 1.0) const;
  /// y = A^T x
  void mult_transpose(std::span<const double> x, std::span<double> y) const;
  /// y += alpha * A^T x
  void mult_transpose_add(std::span<const double> x, std::span<double> y,
                          double alpha = 1.0) const;

  SparseMatrix transpose() const;
  void scale(double alpha);
  std::vector<double> diagonal() const;
  double coeff(int row, int col) const;

  /// Structural + value validity: monotone offsets, strictly increasing
  /// column indices per row, finite values.
  bool is_valid() const;

  std::vector<std::vector<double>> to_dense() const;

private:
  int n_rows_ = 0;
  int n_cols_ = 0;
  std::vector<int> row_offsets_;
  std::vector<int> col_indices_;
  std::vector<double> values_;
};

/// alpha*A + beta*B on the union pattern.
SparseMatrix add(const SparseMatrix& A, double alpha, const SparseMatrix& B,
                 double beta);

/// Max entrywise |A - B| over the union pattern.
double max_abs_difference(const SparseMatrix& A, const SparseMatrix& B);

// Small dense-vector helpers shared by the solvers.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace stflow

#endif  // STFLOW_SPARSE_HPP
