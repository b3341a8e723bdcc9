#include "stflow/spacetime.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "stflow/chebyshev.hpp"
#include "stflow/eig.hpp"

namespace stflow {

namespace {

void project_constants(std::span<double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  for (double& x : v) x -= mean;
}

}  // namespace

SpaceTimeVector SpaceTimeSystem::initial_guess() const {
  SpaceTimeVector x(Nt, Nu, Np);
  for (int k = 1; k <= Nt; ++k) {
    auto uk = x.u(k);
    const auto& g = dirichlet_values[k - 1];
    std::copy(g.begin(), g.end(), uk.begin());
  }
  return x;
}

SpatialDiscretisation discretise(const ProblemSpec& problem, int r) {
  SpatialDiscretisation d;
  d.spaces = build_spaces(problem.mesh_builder(r));
  d.bc = velocity_dirichlet(d.spaces);
  d.Mu = assemble_velocity_mass(d.spaces);
  d.Au = assemble_velocity_stiffness(d.spaces);
  d.B = assemble_divergence(d.spaces);
  d.Mp = assemble_pressure_mass(d.spaces);
  d.Ap_tilde = assemble_pressure_laplacian(d.spaces);
  return d;
}

SpaceTimeSystem assemble_system(const ProblemSpec& problem,
                                const SpatialDiscretisation& disc, int dt_exp,
                                const WindProvider* wind_override) {
  SpaceTimeSystem sys;
  sys.disc = disc;
  const auto& sp = sys.disc.spaces;
  sys.mu = problem.mu;
  sys.Nu = sp.Nu;
  sys.Np = sp.Np;
  sys.dt = std::pow(2.0, -dt_exp);
  const double horizon = problem.t_end - problem.t_begin;
  sys.Nt = static_cast<int>(std::lround(horizon / sys.dt));
  if (sys.Nt < 1) throw std::invalid_argument("assemble_system: empty time grid");
  sys.enclosed = sp.outflow_pressure_dofs.empty();

  const bool has_wind = wind_override != nullptr || problem.has_wind;
  sys.stokes = !has_wind;

  const auto& mask = sys.disc.bc.mask;

  // unique F blocks: one for Stokes, one per step otherwise
  const int n_blocks = has_wind ? sys.Nt : 1;
  sys.fu_of_k.resize(sys.Nt);
  sys.fp_of_k.resize(sys.Nt);
  for (int k = 1; k <= sys.Nt; ++k) {
    sys.fu_of_k[k - 1] = has_wind ? k - 1 : 0;
    sys.fp_of_k[k - 1] = has_wind ? k - 1 : 0;
  }

  std::vector<SparseMatrix> Fu_raw(n_blocks);
  sys.Fu.resize(n_blocks);
  sys.Fp.resize(n_blocks);
  const SparseMatrix base_u = add(sys.disc.Mu, 1.0 / sys.dt, sys.disc.Au, sys.mu);
  const SparseMatrix base_p =
      add(sys.disc.Mp, 1.0 / sys.dt, sys.disc.Ap_tilde, sys.mu);
  for (int b = 0; b < n_blocks; ++b) {
    if (!has_wind) {
      Fu_raw[b] = base_u;
      sys.Fp[b] = base_p;
      continue;
    }
    const int k = b + 1;
    const double t = problem.t_begin + k * sys.dt;
    std::shared_ptr<const WindEvaluator> wind;
    if (wind_override) {
      wind = (*wind_override)(k, t);
    } else {
      wind = std::make_shared<AnalyticWind>(
          [&problem, t](Vec2 x) { return problem.wind(x, t); });
    }
    Fu_raw[b] = add(base_u, 1.0, assemble_velocity_advection(sp, *wind), 1.0);
    sys.Fp[b] = add(base_p, 1.0, assemble_pressure_advection(sp, *wind), 1.0);
  }
  for (int b = 0; b < n_blocks; ++b)
    sys.Fu[b] = eliminate_rows_cols(Fu_raw[b], mask, /*identity_diag=*/true);

  SparseMatrix Msub_raw = sys.disc.Mu;
  Msub_raw.scale(1.0 / sys.dt);
  sys.Msub = eliminate_rows_cols(Msub_raw, mask, /*identity_diag=*/false);
  sys.B = eliminate_cols(sys.disc.B, mask);
  sys.Bt = sys.B.transpose();
  sys.Mp = sys.disc.Mp;
  sys.Ap = sys.disc.Ap_tilde;

  // right-hand side with Dirichlet lifts
  sys.rhs = sys.zero_vector();
  sys.dirichlet_values.resize(sys.Nt);
  std::vector<double> g_prev(sys.Nu, 0.0);  // boundary data at t_0 (quiet start)
  for (int k = 1; k <= sys.Nt; ++k) {
    const double t = problem.t_begin + k * sys.dt;
    std::vector<double> g =
        dirichlet_vector(sys.disc.bc, problem.dirichlet, t, sys.Nu);

    std::vector<double> f(sys.Nu, 0.0);
    if (problem.forcing) {
      f = assemble_load(sp, [&](Vec2 x) { return problem.forcing(x, t); });
    }
    if (problem.neumann) {
      const auto gN = assemble_boundary_load(
          sp, BoundaryTag::Outflow, [&](Vec2 x) { return problem.neumann(x, t); });
      for (int i = 0; i < sys.Nu; ++i) f[i] += gN[i];
    }
    if (k == 1 && problem.initial_velocity) {
      const auto u0 = assemble_load(sp, problem.initial_velocity);
      for (int i = 0; i < sys.Nu; ++i) f[i] += u0[i] / sys.dt;
    }

    auto ru = sys.rhs.u(k);
    Fu_raw[sys.fu_of_k[k - 1]].mult_add(g, ru, -1.0);
    if (k > 1) Msub_raw.mult_add(g_prev, ru, 1.0);
    for (int i = 0; i < sys.Nu; ++i) {
      if (mask[i])
        ru[i] = g[i];
      else
        ru[i] += f[i];
    }
    auto rp = sys.rhs.p(k);
    sys.disc.B.mult_add(g, rp, -1.0);

    sys.dirichlet_values[k - 1] = std::move(g);
    g_prev = sys.dirichlet_values[k - 1];
  }
  return sys;
}

SpaceTimeSystem assemble_system(const ProblemSpec& problem, int r, int dt_exp) {
  return assemble_system(problem, discretise(problem, r), dt_exp);
}

void apply_spacetime_operator(const SpaceTimeSystem& sys,
                              const SpaceTimeVector& x, SpaceTimeVector& y) {
  assert(x.size() == sys.rhs.size());
  if (y.size() != x.size()) y = sys.zero_vector();
  for (int k = 1; k <= sys.Nt; ++k) {
    auto yu = y.u(k);
    sys.fu(k).mult(x.u(k), yu);
    if (k > 1) sys.Msub.mult_add(x.u(k - 1), yu, -1.0);
    sys.Bt.mult_add(x.p(k), yu, 1.0);
    sys.B.mult(x.u(k), y.p(k));
  }
}

SpaceTimeVector apply_spacetime_operator(const SpaceTimeSystem& sys,
                                         const SpaceTimeVector& x) {
  SpaceTimeVector y = sys.zero_vector();
  apply_spacetime_operator(sys, x, y);
  return y;
}

SpaceTimeVector residual(const SpaceTimeSystem& sys, const SpaceTimeVector& x) {
  SpaceTimeVector r = apply_spacetime_operator(sys, x);
  for (std::size_t i = 0; i < r.size(); ++i)
    r.data[i] = sys.rhs.data[i] - r.data[i];
  return r;
}

double relative_residual(const SpaceTimeSystem& sys, const SpaceTimeVector& x) {
  const SpaceTimeVector r = residual(sys, x);
  const double bnorm = norm2(sys.rhs.data);
  return norm2(r.data) / (bnorm > 0.0 ? bnorm : 1.0);
}

PrecondConfig PrecondConfig::ideal() {
  PrecondConfig pc;
  pc.velocity = Velocity::ExactTimeStepLU;
  pc.mass = Mass::LU;
  pc.laplacian = Laplacian::LU;
  return pc;
}

PrecondConfig PrecondConfig::approximate() {
  PrecondConfig pc;
  pc.velocity = Velocity::InnerKrylov;
  pc.inner_tol = 1e-5;
  pc.mass = Mass::Chebyshev;
  pc.laplacian = Laplacian::CG;
  pc.cg_tol = 1e-8;
  return pc;
}

PTPreconditioner::PTPreconditioner(const SpaceTimeSystem& sys, PrecondConfig cfg)
    : sys_(sys), cfg_(cfg) {
  if (cfg_.schur == PrecondConfig::Schur::StokesSimplified && !sys_.stokes)
    throw std::invalid_argument(
        "PTPreconditioner: StokesSimplified requires zero wind");
  fu_lu_.reserve(sys_.Fu.size());
  for (const auto& F : sys_.Fu) fu_lu_.emplace_back(F);
  if (cfg_.mass == PrecondConfig::Mass::LU) mp_lu_.emplace(sys_.Mp);
  if (cfg_.laplacian == PrecondConfig::Laplacian::LU) {
    if (sys_.enclosed) {
      // pin one dof to factor the singular pure-Neumann laplacian; combined
      // with input/output deflation this realises the pseudo-inverse on the
      // complement of constants
      std::vector<char> pin(sys_.Np, 0);
      pin[0] = 1;
      ap_lu_.emplace(eliminate_rows_cols(sys_.Ap, pin, /*identity_diag=*/true));
    } else {
      ap_lu_.emplace(sys_.Ap);
    }
  }
}

void PTPreconditioner::solve_mass(std::span<const double> b,
                                  std::span<double> x) const {
  if (cfg_.mass == PrecondConfig::Mass::LU) {
    mp_lu_->solve(b, x);
    return;
  }
  // Jacobi-scaled P1 triangle mass spectrum lies in [1/2, 2]
  const auto y = chebyshev_solve(sys_.Mp, b, cfg_.chebyshev_iterations, 0.5, 2.0,
                                 /*diag_precond=*/true);
  std::copy(y.begin(), y.end(), x.begin());
}

void PTPreconditioner::solve_laplacian(std::span<const double> b,
                                       std::span<double> x) const {
  std::vector<double> rhs(b.begin(), b.end());
  if (sys_.enclosed) project_constants(rhs);
  if (cfg_.laplacian == PrecondConfig::Laplacian::LU) {
    if (sys_.enclosed) rhs[0] = 0.0;  // identity row of the pinned factor
    ap_lu_->solve(rhs, x);
  } else {
    KrylovConfig kc;
    kc.tol = cfg_.cg_tol;
    kc.max_iter = cfg_.cg_max_iter;
    std::fill(x.begin(), x.end(), 0.0);
    cg_solve(as_operator(sys_.Ap), rhs, x, kc);
  }
  if (sys_.enclosed) project_constants(x);
}

const SparseFactorization& PTPreconditioner::fu_factor(int k) const {
  return fu_lu_[sys_.fu_of_k[k - 1]];
}

std::vector<double> PTPreconditioner::apply_schur_inverse(
    std::span<const double> rp) const {
  const int Nt = sys_.Nt, Np = sys_.Np;
  assert(static_cast<int>(rp.size()) == Nt * Np);
  std::vector<double> rp_loc(rp.begin(), rp.end());
  auto block = [&](std::vector<double>& v, int k) {
    return std::span<double>(v.data() + static_cast<std::size_t>(k - 1) * Np, Np);
  };
  if (sys_.enclosed)
    for (int k = 1; k <= Nt; ++k) project_constants(block(rp_loc, k));

  std::vector<double> out(static_cast<std::size_t>(Nt) * Np, 0.0);
  // stage 1: independent laplacian solves per step
  std::vector<double> z(static_cast<std::size_t>(Nt) * Np, 0.0);
  for (int k = 1; k <= Nt; ++k)
    solve_laplacian(block(rp_loc, k), block(z, k));

  if (cfg_.schur == PrecondConfig::Schur::StokesSimplified) {
    // bidiagonal closed form: diagonal Ap^{-1}/dt + mu*Mp^{-1},
    // subdiagonal -Ap^{-1}/dt
    std::vector<double> m(Np);
    for (int k = 1; k <= Nt; ++k) {
      solve_mass(block(rp_loc, k), m);
      auto ok = block(out, k);
      const auto zk = block(z, k);
      for (int i = 0; i < Np; ++i) ok[i] = zk[i] / sys_.dt + sys_.mu * m[i];
      if (k > 1) {
        const auto zp = block(z, k - 1);
        for (int i = 0; i < Np; ++i) ok[i] -= zp[i] / sys_.dt;
      }
    }
    return out;
  }

  // stage 2: bidiagonal multiply w = Fp z
  std::vector<double> w(static_cast<std::size_t>(Nt) * Np, 0.0);
  for (int k = 1; k <= Nt; ++k) {
    auto wk = block(w, k);
    sys_.fp(k).mult(block(z, k), wk);
    if (k > 1) sys_.Mp.mult_add(block(z, k - 1), wk, -1.0 / sys_.dt);
  }
  // stage 3: independent mass solves per step
  for (int k = 1; k <= Nt; ++k) solve_mass(block(w, k), block(out, k));
  return out;
}

std::vector<double> PTPreconditioner::solve_velocity_block(
    std::span<const double> ru) const {
  const int Nt = sys_.Nt, Nu = sys_.Nu;
  assert(static_cast<int>(ru.size()) == Nt * Nu);
  std::vector<double> out(static_cast<std::size_t>(Nt) * Nu, 0.0);
  auto block = [&](auto& v, int k) {
    return std::span<double>(v.data() + static_cast<std::size_t>(k - 1) * Nu, Nu);
  };

  if (cfg_.velocity == PrecondConfig::Velocity::ExactTimeStepLU) {
    std::vector<double> t(Nu);
    for (int k = 1; k <= Nt; ++k) {
      std::copy_n(ru.data() + static_cast<std::size_t>(k - 1) * Nu, Nu, t.data());
      if (k > 1) sys_.Msub.mult_add(block(out, k - 1), t, 1.0);
      fu_factor(k).solve(t, block(out, k));
    }
    return out;
  }

  // inner GMRES on the space-time velocity block, block-Jacobi of the
  // per-step factors as its preconditioner
  LinearOperator A = [this, Nt, Nu](std::span<const double> x,
                                    std::span<double> y) {
    for (int k = 1; k <= Nt; ++k) {
      auto yk = y.subspan(static_cast<std::size_t>(k - 1) * Nu, Nu);
      sys_.fu(k).mult(x.subspan(static_cast<std::size_t>(k - 1) * Nu, Nu), yk);
      if (k > 1)
        sys_.Msub.mult_add(x.subspan(static_cast<std::size_t>(k - 2) * Nu, Nu),
                           yk, -1.0);
    }
  };
  LinearOperator M = [this, Nt, Nu](std::span<const double> x,
                                    std::span<double> y) {
    for (int k = 1; k <= Nt; ++k)
      fu_factor(k).solve(x.subspan(static_cast<std::size_t>(k - 1) * Nu, Nu),
                         y.subspan(static_cast<std::size_t>(k - 1) * Nu, Nu));
  };
  KrylovConfig kc;
  kc.tol = cfg_.inner_tol;
  kc.max_iter = cfg_.inner_max_iter;
  const SolveReport rep = gmres(A, ru, out, kc, &M);
  last_inner_iters_ = rep.iterations;
  return out;
}

void PTPreconditioner::apply(const SpaceTimeVector& r,
                             SpaceTimeVector& out) const {
  if (out.size() != r.size()) out = sys_.zero_vector();
  // z_p = -X^{-1} r_p
  std::vector<double> zp = apply_schur_inverse(r.p_all());
  for (double& v : zp) v = -v;
  // z_u = F_u^{-1} (r_u - B^T z_p)
  std::vector<double> t(static_cast<std::size_t>(sys_.Nt) * sys_.Nu);
  for (int k = 1; k <= sys_.Nt; ++k) {
    auto tk = std::span<double>(
        t.data() + static_cast<std::size_t>(k - 1) * sys_.Nu, sys_.Nu);
    const auto rk = r.u(k);
    std::copy(rk.begin(), rk.end(), tk.begin());
    sys_.Bt.mult_add(
        std::span<const double>(
            zp.data() + static_cast<std::size_t>(k - 1) * sys_.Np, sys_.Np),
        tk, -1.0);
  }
  const std::vector<double> zu = solve_velocity_block(t);
  std::copy(zu.begin(), zu.end(), out.u_all().begin());
  std::copy(zp.begin(), zp.end(), out.p_all().begin());
}

SpaceTimeVector PTPreconditioner::apply(const SpaceTimeVector& r) const {
  SpaceTimeVector out = sys_.zero_vector();
  apply(r, out);
  return out;
}

AllAtOnceResult solve_all_at_once(const SpaceTimeSystem& sys,
                                  const PrecondConfig& pc,
                                  const KrylovConfig& kc) {
  const PTPreconditioner PT(sys, pc);
  KrylovConfig cfg = kc;
  cfg.flexible = pc.any_iterative();

  AllAtOnceResult result{sys.initial_guess(), {}};
  LinearOperator A = [&sys](std::span<const double> x, std::span<double> y) {
    SpaceTimeVector xv = sys.zero_vector();
    std::copy(x.begin(), x.end(), xv.data.begin());
    SpaceTimeVector yv = sys.zero_vector();
    apply_spacetime_operator(sys, xv, yv);
    std::copy(yv.data.begin(), yv.data.end(), y.begin());
  };
  LinearOperator M = [&PT, &sys](std::span<const double> x, std::span<double> y) {
    SpaceTimeVector xv = sys.zero_vector();
    std::copy(x.begin(), x.end(), xv.data.begin());
    SpaceTimeVector yv = PT.apply(xv);
    std::copy(yv.data.begin(), yv.data.end(), y.begin());
  };
  result.report = gmres(A, sys.rhs.data, result.x.data, cfg, &M);
  return result;
}

TimeSteppingResult sequential_time_stepping(const SpaceTimeSystem& sys,
                                            const PrecondConfig& pc, double tol,
                                            int max_iter_per_step) {
  const PTPreconditioner PT(sys, pc);
  const int Nu = sys.Nu, Np = sys.Np;
  const double step_tol = tol / std::sqrt(static_cast<double>(sys.Nt));

  TimeSteppingResult result;
  result.x = sys.zero_vector();
  result.converged = true;

  std::vector<double> x(Nu + Np, 0.0), b(Nu + Np, 0.0);
  std::vector<double> u_prev(Nu, 0.0);
  std::vector<double> p_prev(Np, 0.0);
  for (int k = 1; k <= sys.Nt; ++k) {
    LinearOperator A = [&sys, k, Nu, Np](std::span<const double> xv,
                                         std::span<double> yv) {
      auto xu = xv.first(Nu);
      auto xp = xv.subspan(Nu, Np);
      auto yu = yv.first(Nu);
      auto yp = yv.subspan(Nu, Np);
      sys.fu(k).mult(xu, yu);
      sys.Bt.mult_add(xp, yu, 1.0);
      sys.B.mult(xu, yp);
    };
    // single time-step counterpart of P_T: X_k^{-1} = Mp^{-1} Fp_k Ap^{-1}
    LinearOperator M = [&sys, &PT, k, Nu, Np](std::span<const double> rv,
                                              std::span<double> zv) {
      auto rp = rv.subspan(Nu, Np);
      auto zu = zv.first(Nu);
      auto zp = zv.subspan(Nu, Np);
      std::vector<double> rp_loc(rp.begin(), rp.end());
      if (sys.enclosed) project_constants(rp_loc);
      std::vector<double> t(Np), w(Np);
      PT.solve_laplacian(rp_loc, t);
      sys.fp(k).mult(t, w);
      PT.solve_mass(w, zp);
      for (double& v : zp) v = -v;
      std::vector<double> ru(rv.begin(), rv.begin() + Nu);
      sys.Bt.mult_add(zp, std::span<double>(ru), -1.0);
      PT.fu_factor(k).solve(ru, zu);
    };

    // rhs: step block plus the coupling to the previous step
    std::copy(sys.rhs.u(k).begin(), sys.rhs.u(k).end(), b.begin());
    if (k > 1)
      sys.Msub.mult_add(u_prev, std::span<double>(b.data(), Nu), 1.0);
    std::copy(sys.rhs.p(k).begin(), sys.rhs.p(k).end(), b.begin() + Nu);

    // warm start from the previous step, Dirichlet entries reseeded
    std::copy(u_prev.begin(), u_prev.end(), x.begin());
    std::copy(p_prev.begin(), p_prev.end(), x.begin() + Nu);
    const auto& g = sys.dirichlet_values[k - 1];
    for (int i = 0; i < Nu; ++i)
      if (sys.disc.bc.mask[i]) x[i] = g[i];

    KrylovConfig kc;
    kc.tol = step_tol;
    kc.max_iter = max_iter_per_step;
    kc.flexible = pc.any_iterative();
    const SolveReport rep = gmres(A, b, x, kc, &M);
    if (!rep.converged)
      throw std::runtime_error("sequential_time_stepping: step " +
                               std::to_string(k) + " did not converge");
    result.step_iterations.push_back(rep.iterations);

    std::copy(x.begin(), x.begin() + Nu, u_prev.begin());
    std::copy(x.begin() + Nu, x.end(), p_prev.begin());
    std::copy(u_prev.begin(), u_prev.end(), result.x.u(k).begin());
    std::copy(p_prev.begin(), p_prev.end(), result.x.p(k).begin());
  }
  double total = 0.0;
  for (int it : result.step_iterations) total += it;
  result.mean_iterations = total / static_cast<double>(sys.Nt);
  return result;
}

std::vector<std::complex<double>> preconditioned_schur_eigs(
    const SpaceTimeSystem& sys, int k) {
  if (sys.Np < 2)
    throw std::invalid_argument("preconditioned_schur_eigs: degenerate mesh");
  if (k < 1 || k > sys.Nt)
    throw std::invalid_argument("preconditioned_schur_eigs: bad time index");

  PrecondConfig pc = PrecondConfig::ideal();
  const PTPreconditioner PT(sys, pc);
  const int Np = sys.Np, Nu = sys.Nu;

  std::vector<double> op(static_cast<std::size_t>(Np) * Np, 0.0);
  std::vector<double> e(Np, 0.0), a(Nu), fb(Nu), c(Np), d(Np), w(Np), col(Np);
  for (int j = 0; j < Np; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    sys.Bt.mult(e, a);
    PT.fu_factor(k).solve(a, fb);
    sys.B.mult(fb, c);
    PT.solve_laplacian(c, d);
    sys.fp(k).mult(d, w);
    PT.solve_mass(w, col);
    for (int i = 0; i < Np; ++i) op[static_cast<std::size_t>(i) * Np + j] = col[i];
  }
  std::vector<std::complex<double>> eigs = dense_eigenvalues(op, Np);
  if (sys.enclosed) {
    // drop the exact zero produced by the deflated constant mode
    auto it = std::min_element(eigs.begin(), eigs.end(),
                               [](const auto& x, const auto& y) {
                                 return std::abs(x) < std::abs(y);
                               });
    double maxabs = 0.0;
    for (const auto& v : eigs) maxabs = std::max(maxabs, std::abs(v));
    if (std::abs(*it) > 1e-8 * maxabs)
      throw std::runtime_error(
          "preconditioned_schur_eigs: constant mode not deflated");
    eigs.erase(it);
  }
  return eigs;
}

}  // namespace stflow
