#include "stflow/krylov.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace stflow {

namespace {

void apply_or_copy(const LinearOperator* M, std::span<const double> v,
                   std::span<double> z) {
  if (M)
    (*M)(v, z);
  else
    std::copy(v.begin(), v.end(), z.begin());
}

}  // namespace

SolveReport gmres(const LinearOperator& A, std::span<const double> b,
                  std::span<double> x, const KrylovConfig& cfg,
                  const LinearOperator* M) {
  if (cfg.tol <= 0 || cfg.max_iter < 1)
    throw std::invalid_argument("gmres: invalid config");
  const std::size_t n = b.size();
  SolveReport report;

  const double bnorm = norm2(b);
  const double denom = bnorm > 0.0 ? bnorm : 1.0;

  std::vector<double> r(n);
  A(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  double beta = norm2(r);

  report.residual_history.push_back(beta / denom);
  if (beta / denom <= cfg.tol) {
    report.converged = true;
    return report;
  }

  const int m_max = std::min<int>(cfg.max_iter, static_cast<int>(n));
  std::vector<std::vector<double>> V;   // Arnoldi basis
  std::vector<std::vector<double>> Z;   // preconditioned basis (flexible)
  std::vector<std::vector<double>> H;   // H[j] holds column j (size j+2)
  std::vector<double> cs, sn;           // Givens rotations
  std::vector<double> g;                // rotated rhs of the least-squares pb

  V.emplace_back(r);
  for (double& v : V[0]) v /= beta;
  g.push_back(beta);

  std::vector<double> w(n), z(n);
  int m = 0;
  for (int j = 0; j < m_max; ++j) {
    apply_or_copy(M, V[j], z);
    if (cfg.flexible) Z.push_back(z);
    A(z, w);

    // modified Gram-Schmidt + one reorthogonalisation pass
    H.emplace_back(j + 2, 0.0);
    auto& h = H[j];
    for (int i = 0; i <= j; ++i) {
      const double hij = dot(w, V[i]);
      h[i] = hij;
      axpy(-hij, V[i], w);
    }
    for (int i = 0; i <= j; ++i) {
      const double c = dot(w, V[i]);
      h[i] += c;
      axpy(-c, V[i], w);
    }
    h[j + 1] = norm2(w);

    // apply previous rotations to the new column
    for (int i = 0; i < j; ++i) {
      const double t = cs[i] * h[i] + sn[i] * h[i + 1];
      h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
      h[i] = t;
    }
    // new rotation
    const double rho = std::hypot(h[j], h[j + 1]);
    const double c_new = rho > 0.0 ? h[j] / rho : 1.0;
    const double s_new = rho > 0.0 ? h[j + 1] / rho : 0.0;
    cs.push_back(c_new);
    sn.push_back(s_new);
    h[j] = rho;
    const double g_next = -s_new * g[j];
    g[j] = c_new * g[j];
    g.push_back(g_next);

    m = j + 1;
    const double relres = std::abs(g[j + 1]) / denom;
    report.residual_history.push_back(relres);

    const bool happy = h[j + 1] <= 1e-14 * beta;
    if (relres <= cfg.tol || happy) {
      report.converged = true;
      report.breakdown = happy && relres > cfg.tol;
      break;
    }
    if (j + 1 < m_max) {
      V.emplace_back(w);
      for (double& v : V[j + 1]) v /= h[j + 1];
    }
  }
  report.iterations = m;

  // back substitution of the triangular least-squares system
  std::vector<double> y(m, 0.0);
  for (int i = m - 1; i >= 0; --i) {
    double s = g[i];
    for (int k = i + 1; k < m; ++k) s -= H[k][i] * y[k];
    y[i] = s / H[i][i];
  }

  // x += M^-1 V y (right preconditioning); flexible mode uses the stored Z
  std::vector<double> u(n, 0.0);
  if (cfg.flexible) {
    for (int i = 0; i < m; ++i) axpy(y[i], Z[i], u);
    axpy(1.0, u, x);
  } else {
    for (int i = 0; i < m; ++i) axpy(y[i], V[i], u);
    apply_or_copy(M, u, z);
    axpy(1.0, z, x);
  }
  return report;
}

SolveReport cg_solve(const LinearOperator& A, std::span<const double> b,
                     std::span<double> x, const KrylovConfig& cfg) {
  const std::size_t n = b.size();
  SolveReport report;
  const double bnorm = norm2(b);
  const double denom = bnorm > 0.0 ? bnorm : 1.0;

  std::vector<double> r(n), p(n), Ap(n);
  A(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  double rr = dot(r, r);
  report.residual_history.push_back(std::sqrt(rr) / denom);
  if (report.residual_history.back() <= cfg.tol) {
    report.converged = true;
    return report;
  }
  p = r;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    A(p, Ap);
    const double pAp = dot(p, Ap);
    if (pAp <= 0.0) break;  // lost positive definiteness (kernel direction)
    const double alpha = rr / pAp;
    axpy(alpha, p, x);
    axpy(-alpha, Ap, r);
    const double rr_new = dot(r, r);
    report.iterations = it;
    report.residual_history.push_back(std::sqrt(rr_new) / denom);
    if (report.residual_history.back() <= cfg.tol) {
      report.converged = true;
      return report;
    }
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  return report;
}

}  // namespace stflow
