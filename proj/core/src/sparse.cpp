#include "stflow/sparse.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace stflow {

SparseMatrix SparseMatrix::from_triplets(int n_rows, int n_cols,
                                         std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  SparseMatrix A(n_rows, n_cols);
  A.col_indices_.reserve(triplets.size());
  A.values_.reserve(triplets.size());
  for (std::size_t i = 0; i < triplets.size();) {
    const int r = triplets[i].row;
    const int c = triplets[i].col;
    assert(r >= 0 && r < n_rows && c >= 0 && c < n_cols);
    double v = 0.0;
    while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c) {
      v += triplets[i].value;
      ++i;
    }
    A.col_indices_.push_back(c);
    A.values_.push_back(v);
    A.row_offsets_[r + 1] = static_cast<int>(A.values_.size());
  }
  // forward-fill offsets of empty rows
  for (int r = 0; r < n_rows; ++r)
    A.row_offsets_[r + 1] = std::max(A.row_offsets_[r + 1], A.row_offsets_[r]);
  return A;
}

SparseMatrix SparseMatrix::identity(int n) {
  SparseMatrix I(n, n);
  I.col_indices_.resize(n);
  I.values_.assign(n, 1.0);
  for (int i = 0; i < n; ++i) {
    I.col_indices_[i] = i;
    I.row_offsets_[i + 1] = i + 1;
  }
  return I;
}

void SparseMatrix::mult(std::span<const double> x, std::span<double> y) const {
  assert(static_cast<int>(x.size()) == n_cols_);
  assert(static_cast<int>(y.size()) == n_rows_);
  for (int r = 0; r < n_rows_; ++r) {
    double s = 0.0;
    for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      s += values_[k] * x[col_indices_[k]];
    y[r] = s;
  }
}

void SparseMatrix::mult_add(std::span<const double> x, std::span<double> y,
                            double alpha) const {
  for (int r = 0; r < n_rows_; ++r) {
    double s = 0.0;
    for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      s += values_[k] * x[col_indices_[k]];
    y[r] += alpha * s;
  }
}

void SparseMatrix::mult_transpose(std::span<const double> x,
                                  std::span<double> y) const {
  assert(static_cast<int>(x.size()) == n_rows_);
  assert(static_cast<int>(y.size()) == n_cols_);
  std::fill(y.begin(), y.end(), 0.0);
  mult_transpose_add(x, y, 1.0);
}

void SparseMatrix::mult_transpose_add(std::span<const double> x,
                                      std::span<double> y, double alpha) const {
  for (int r = 0; r < n_rows_; ++r) {
    const double xr = alpha * x[r];
    if (xr == 0.0) continue;
    for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      y[col_indices_[k]] += values_[k] * xr;
  }
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (int r = 0; r < n_rows_; ++r)
    for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      t.push_back({col_indices_[k], r, values_[k]});
  return from_triplets(n_cols_, n_rows_, std::move(t));
}

void SparseMatrix::scale(double alpha) {
  for (double& v : values_) v *= alpha;
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> d(std::min(n_rows_, n_cols_), 0.0);
  for (int r = 0; r < static_cast<int>(d.size()); ++r)
    d[r] = coeff(r, r);
  return d;
}

double SparseMatrix::coeff(int row, int col) const {
  const auto first = col_indices_.begin() + row_offsets_[row];
  const auto last = col_indices_.begin() + row_offsets_[row + 1];
  const auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return 0.0;
  return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

bool SparseMatrix::is_valid() const {
  if (static_cast<int>(row_offsets_.size()) != n_rows_ + 1) return false;
  if (row_offsets_.front() != 0) return false;
  if (row_offsets_.back() != static_cast<int>(values_.size())) return false;
  for (int r = 0; r < n_rows_; ++r) {
    if (row_offsets_[r + 1] < row_offsets_[r]) return false;
    for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      if (col_indices_[k] < 0 || col_indices_[k] >= n_cols_) return false;
      if (k > row_offsets_[r] && col_indices_[k] <= col_indices_[k - 1])
        return false;
      if (!std::isfinite(values_[k])) return false;
    }
  }
  return true;
}

std::vector<std::vector<double>> SparseMatrix::to_dense() const {
  std::vector<std::vector<double>> D(n_rows_, std::vector<double>(n_cols_, 0.0));
  for (int r = 0; r < n_rows_; ++r)
    for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      D[r][col_indices_[k]] = values_[k];
  return D;
}

SparseMatrix add(const SparseMatrix& A, double alpha, const SparseMatrix& B,
                 double beta) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw std::invalid_argument("add: dimension mismatch");
  std::vector<SparseMatrix::Triplet> t;
  t.reserve(A.nnz() + B.nnz());
  for (int r = 0; r < A.rows(); ++r) {
    for (int k = A.row_offsets()[r]; k < A.row_offsets()[r + 1]; ++k)
      t.push_back({r, A.col_indices()[k], alpha * A.values()[k]});
    for (int k = B.row_offsets()[r]; k < B.row_offsets()[r + 1]; ++k)
      t.push_back({r, B.col_indices()[k], beta * B.values()[k]});
  }
  return SparseMatrix::from_triplets(A.rows(), A.cols(), std::move(t));
}

double max_abs_difference(const SparseMatrix& A, const SparseMatrix& B) {
  const SparseMatrix D = add(A, 1.0, B, -1.0);
  double m = 0.0;
  for (double v : D.values()) m = std::max(m, std::abs(v));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace stflow
