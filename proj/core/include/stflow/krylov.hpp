#ifndef STFLOW_KRYLOV_HPP
#define STFLOW_KRYLOV_HPP

#include <functional>
#include <span>
#include <vector>

#include "stflow/sparse.hpp"

namespace stflow {

/// Applies a linear operator: y = A x. Operators may be matrix-free closures.
using LinearOperator =
    std::function<void(std::span<const double>, std::span<double>)>;

struct KrylovConfig {
  double tol = 1e-10;  ///< relative residual target (w.r.t. ||b||)
  int max_iter = 100;
  bool flexible = false;  ///< FGMRES: preconditioner may vary per iteration
};

struct SolveReport {
  int iterations = 0;
  std::vector<double> residual_history;  ///< relative residuals, starts at ||r0||/||b||
  bool converged = false;
  bool breakdown = false;  ///< lucky Arnoldi breakdown (converged in subspace)
};

/// Right-preconditioned GMRES with full recurrence (no restart), modified
/// Gram-Schmidt plus one reorthogonalisation pass. Solves A x = b starting
/// from x (used as initial guess, overwritten with the solution). With
/// cfg.flexible the preconditioned basis vectors are stored so M may change
/// between iterations.
SolveReport gmres(const LinearOperator& A, std::span<const double> b,
                  std::span<double> x, const KrylovConfig& cfg,
                  const LinearOperator* M = nullptr);

/// Conjugate gradients for SPD operators. For a singular operator with a
/// known constant kernel the right-hand side must be orthogonalised against
/// constants first.
SolveReport cg_solve(const LinearOperator& A, std::span<const double> b,
                     std::span<double> x, const KrylovConfig& cfg);

inline LinearOperator as_operator(const SparseMatrix& A) {
  return [&A](std::span<const double> x, std::span<double> y) { A.mult(x, y); };
}

}  // namespace stflow

#endif  // STFLOW_KRYLOV_HPP
