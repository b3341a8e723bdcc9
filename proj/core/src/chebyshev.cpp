#include "stflow/chebyshev.hpp"

#include <cassert>
#include <stdexcept>

namespace stflow {

std::vector<double> chebyshev_solve(const SparseMatrix& A,
                                    std::span<const double> b, int k,
                                    double lam_min, double lam_max,
                                    bool diag_precond) {
  if (!(lam_min > 0.0) || lam_max < lam_min)
    throw std::invalid_argument("chebyshev_solve: invalid eigenvalue bounds");
  const std::size_t n = b.size();
  std::vector<double> x(n, 0.0);
  if (k == 0) return x;

  std::vector<double> inv_diag;
  if (diag_precond) {
    inv_diag = A.diagonal();
    for (double& d : inv_diag) d = 1.0 / d;
  }
  auto precondition = [&](const std::vector<double>& r, std::vector<double>& z) {
    if (diag_precond)
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    else
      z = r;
  };

  const double d = 0.5 * (lam_max + lam_min);
  const double c = 0.5 * (lam_max - lam_min);

  std::vector<double> r(b.begin(), b.end());
  std::vector<double> z(n), step(n), Astep(n);
  if (c == 0.0) {
    // one-point spectrum: plain scaled Richardson
    for (int it = 1; it <= k; ++it) {
      precondition(r, z);
      for (std::size_t i = 0; i < n; ++i) step[i] = z[i] / d;
      axpy(1.0, step, x);
      A.mult(step, Astep);
      axpy(-1.0, Astep, r);
    }
    return x;
  }

  // three-term recurrence on the update vector (sigma-rho form)
  const double sigma1 = d / c;
  double rho_prev = 1.0 / sigma1;
  for (int it = 1; it <= k; ++it) {
    precondition(r, z);
    if (it == 1) {
      for (std::size_t i = 0; i < n; ++i) step[i] = z[i] / d;
    } else {
      const double rho = 1.0 / (2.0 * sigma1 - rho_prev);
      const double gamma = 2.0 * rho / c;
      const double beta = rho * rho_prev;
      for (std::size_t i = 0; i < n; ++i)
        step[i] = gamma * z[i] + beta * step[i];
      rho_prev = rho;
    }
    axpy(1.0, step, x);
    A.mult(step, Astep);
    axpy(-1.0, Astep, r);
  }
  return x;
}

}  // namespace stflow
