#ifndef STFLOW_CHEBYSHEV_HPP
#define STFLOW_CHEBYSHEV_HPP

#include <span>
#include <vector>

#include "stflow/sparse.hpp"

namespace stflow {

/// k iterations of the Chebyshev semi-iteration for SPD A, starting from
/// x0 = 0. [lam_min, lam_max] must bound the spectrum of the (optionally
/// Jacobi-preconditioned) matrix. k = 0 returns the zero vector.
std::vector<double> chebyshev_solve(const SparseMatrix& A,
                                    std::span<const double> b, int k,
                                    double lam_min, double lam_max,
                                    bool diag_precond);

}  // namespace stflow

#endif  // STFLOW_CHEBYSHEV_HPP
