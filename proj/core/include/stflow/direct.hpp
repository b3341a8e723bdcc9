#ifndef STFLOW_DIRECT_HPP
#define STFLOW_DIRECT_HPP

#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "stflow/sparse.hpp"

namespace stflow {

struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Sparse LU factorization with partial pivoting and fill-reducing column
/// ordering. The symbolic pattern can be reused across matrices with the
/// same structure via refactorize().
class SparseFactorization {
public:
  explicit SparseFactorization(const SparseMatrix& A);
  ~SparseFactorization();
  SparseFactorization(SparseFactorization&&) noexcept;
  SparseFactorization& operator=(SparseFactorization&&) noexcept;

  /// Solve A x = b. Throws SingularMatrixError on exactly singular input.
  std::vector<double> solve(std::span<const double> b) const;
  void solve(std::span<const double> b, std::span<double> x) const;

  /// Recompute the numeric factors for a matrix with the same sparsity.
  void refactorize(const SparseMatrix& A);

  int size() const { return n_; }

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int n_ = 0;
};

inline SparseFactorization sparse_lu(const SparseMatrix& A) {
  return SparseFactorization(A);
}

}  // namespace stflow

#endif  // STFLOW_DIRECT_HPP
