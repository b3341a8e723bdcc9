#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "dense_oracle.hpp"
#include "stflow/problems.hpp"
#include "stflow/spacetime.hpp"

using namespace stflow;
using stflow::test::ExactSchurPreconditioner;

namespace {

SpaceTimeVector random_vector(const SpaceTimeSystem& sys, std::mt19937& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  SpaceTimeVector v = sys.zero_vector();
  for (double& x : v.data) x = dist(rng);
  return v;
}

double rel_err(std::span<const double> got, const Eigen::VectorXd& want) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < want.size(); ++i) {
    num += (got[i] - want[i]) * (got[i] - want[i]);
    den += want[i] * want[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

}  // namespace

TEST_CASE("operator maps zero to zero and matches the dense assembly") {
  std::mt19937 rng(21);
  for (ProblemId id : {ProblemId::Cavity, ProblemId::Poiseuille}) {
    const ProblemSpec prob = make_problem(id);
    for (int nt_exp : {0, 2}) {  // Nt = 1 and Nt = 4
      const SpaceTimeSystem sys = assemble_system(prob, 1, nt_exp);
      const SpaceTimeVector zero = sys.zero_vector();
      CHECK(norm2(apply_spacetime_operator(sys, zero).data) == 0.0);

      const Eigen::MatrixXd A = stflow::test::dense_spacetime_matrix(sys);
      for (int trial = 0; trial < 20; ++trial) {
        const SpaceTimeVector x = random_vector(sys, rng);
        const SpaceTimeVector y = apply_spacetime_operator(sys, x);
        Eigen::VectorXd xe(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) xe[i] = x.data[i];
        const Eigen::VectorXd ye = A * xe;
        CHECK(rel_err(y.data, ye) < 1e-12);
      }
    }
  }
}

TEST_CASE("Nt=1 operator is the plain saddle-point block") {
  const ProblemSpec prob = make_problem(ProblemId::Cavity);
  const SpaceTimeSystem sys = assemble_system(prob, 1, 0);
  REQUIRE(sys.Nt == 1);
  std::mt19937 rng(4);
  const SpaceTimeVector x = random_vector(sys, rng);
  const SpaceTimeVector y = apply_spacetime_operator(sys, x);
  std::vector<double> yu(sys.Nu), yp(sys.Np);
  sys.fu(1).mult(x.u(1), yu);
  sys.Bt.mult_add(x.p(1), yu, 1.0);
  sys.B.mult(x.u(1), yp);
  for (int i = 0; i < sys.Nu; ++i) CHECK(y.u(1)[i] == doctest::Approx(yu[i]));
  for (int i = 0; i < sys.Np; ++i) CHECK(y.p(1)[i] == doctest::Approx(yp[i]));
}

TEST_CASE("schur inverse: zero input, algebraic Nt=1 identity, both forms agree") {
  const ProblemSpec prob = make_problem(ProblemId::Cavity);
  const SpaceTimeSystem sys = assemble_system(prob, 2, 0);
  const PTPreconditioner general(sys, PrecondConfig::ideal());
  PrecondConfig simp_cfg = PrecondConfig::ideal();
  simp_cfg.schur = PrecondConfig::Schur::StokesSimplified;
  const PTPreconditioner simplified(sys, simp_cfg);

  std::vector<double> zero(sys.Np, 0.0);
  const auto out0 = general.apply_schur_inverse(zero);
  CHECK(norm2(out0) == 0.0);

  std::mt19937 rng(31);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> r(sys.Np);
  for (double& v : r) v = dist(rng);
  const auto a = general.apply_schur_inverse(r);
  const auto b = simplified.apply_schur_inverse(r);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < sys.Np; ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  CHECK(std::sqrt(num / den) < 1e-12);
}

TEST_CASE("general schur application matches the dense oracle on Poiseuille") {
  const ProblemSpec prob = make_problem(ProblemId::Poiseuille);
  const SpaceTimeSystem sys = assemble_system(prob, 1, 2);  // Nt = 4
  REQUIRE(!sys.enclosed);
  const PTPreconditioner PT(sys, PrecondConfig::ideal());

  const Eigen::MatrixXd X = stflow::test::dense_schur_approximation(sys);
  const Eigen::MatrixXd Xinv = X.inverse();

  std::mt19937 rng(17);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd r(sys.Nt * sys.Np);
    for (int i = 0; i < r.size(); ++i) r[i] = dist(rng);
    std::vector<double> rv(r.data(), r.data() + r.size());
    const auto got = PT.apply_schur_inverse(rv);
    const Eigen::VectorXd want = Xinv * r;
    CHECK(rel_err(got, want) < 1e-11);
  }
}

TEST_CASE("velocity block solve is consistent with its forward operator") {
  const ProblemSpec prob = make_problem(ProblemId::Cavity);
  const SpaceTimeSystem sys = assemble_system(prob, 2, 2);  // Nt = 4
  const PTPreconditioner PT(sys, PrecondConfig::ideal());
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(sys.Nt) * sys.Nu);
  for (double& v : x) v = dist(rng);

  // r = F_u x
  std::vector<double> r(x.size());
  for (int k = 1; k <= sys.Nt; ++k) {
    auto rk = std::span<double>(r.data() + (k - 1) * sys.Nu, sys.Nu);
    sys.fu(k).mult(
        std::span<const double>(x.data() + (k - 1) * sys.Nu, sys.Nu), rk);
    if (k > 1)
      sys.Msub.mult_add(
          std::span<const double>(x.data() + (k - 2) * sys.Nu, sys.Nu), rk,
          -1.0);
  }
  const auto got = PT.solve_velocity_block(r);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (got[i] - x[i]) * (got[i] - x[i]);
    den += x[i] * x[i];
  }
  CHECK(std::sqrt(num / den) < 1e-11);
}

TEST_CASE("inner-Krylov velocity solve reaches its tolerance") {
  const ProblemSpec prob = make_problem(ProblemId::Cavity);
  const SpaceTimeSystem sys = assemble_system(prob, 2, 2);
  PrecondConfig pc = PrecondConfig::ideal();
  pc.velocity = PrecondConfig::Velocity::InnerKrylov;
  pc.inner_tol = 1e-6;
  const PTPreconditioner PT(sys, pc);
  std::mt19937 rng(6);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> r(static_cast<std::size_t>(sys.Nt) * sys.Nu);
  for (double& v : r) v = dist(rng);
  const auto x = PT.solve_velocity_block(r);

  std::vector<double> back(r.size());
  for (int k = 1; k <= sys.Nt; ++k) {
    auto bk = std::span<double>(back.data() + (k - 1) * sys.Nu, sys.Nu);
    sys.fu(k).mult(
        std::span<const double>(x.data() + (k - 1) * sys.Nu, sys.Nu), bk);
    if (k > 1)
      sys.Msub.mult_add(
          std::span<const double>(x.data() + (k - 2) * sys.Nu, sys.Nu), bk,
          -1.0);
  }
  double num = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i)
    num += (back[i] - r[i]) * (back[i] - r[i]);
  CHECK(std::sqrt(num) / norm2(r) <= 1e-6 * 1.01);
}

TEST_CASE("P_T inverse: zero input, linearity, Nt=1 single-step coincidence") {
  const ProblemSpec prob = make_problem(ProblemId::Poiseuille);
  const SpaceTimeSystem sys = assemble_system(prob, 2, 0);
  const PTPreconditioner PT(sys, PrecondConfig::ideal());

  CHECK(norm2(PT.apply(sys.zero_vector()).data) == 0.0);

  std::mt19937 rng(8);
  const SpaceTimeVector r = random_vector(sys, rng);
  const SpaceTimeVector s = random_vector(sys, rng);
  const double alpha = 0.7, beta = -1.3;
  SpaceTimeVector combo = sys.zero_vector();
  for (std::size_t i = 0; i < combo.size(); ++i)
    combo.data[i] = alpha * r.data[i] + beta * s.data[i];
  const SpaceTimeVector z_combo = PT.apply(combo);
  const SpaceTimeVector zr = PT.apply(r);
  const SpaceTimeVector zs = PT.apply(s);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < combo.size(); ++i) {
    const double want = alpha * zr.data[i] + beta * zs.data[i];
    num += (z_combo.data[i] - want) * (z_combo.data[i] - want);
    den += want * want;
  }
  CHECK(std::sqrt(num / den) < 1e-10);

  // Nt=1: P_T^{-1} equals the single-step PCD action
  const auto rp = r.p(1);
  std::vector<double> t(sys.Np), w(sys.Np), zp(sys.Np);
  PT.solve_laplacian(rp, t);
  sys.fp(1).mult(t, w);
  PT.solve_mass(w, zp);
  for (double& v : zp) v = -v;
  std::vector<double> ru(r.u(1).begin(), r.u(1).end());
  sys.Bt.mult_add(zp, std::span<double>(ru), -1.0);
  std::vector<double> zu(sys.Nu);
  PT.fu_factor(1).solve(ru, zu);
  const SpaceTimeVector z = PT.apply(r);
  for (int i = 0; i < sys.Nu; ++i)
    CHECK(z.u(1)[i] == doctest::Approx(zu[i]).epsilon(1e-12).scale(1.0));
  for (int i = 0; i < sys.Np; ++i)
    CHECK(z.p(1)[i] == doctest::Approx(zp[i]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("schur stages act independently per time block") {
  const ProblemSpec prob = make_problem(ProblemId::Poiseuille);
  const SpaceTimeSystem sys = assemble_system(prob, 1, 2);  // Nt = 4
  const PTPreconditioner PT(sys, PrecondConfig::ideal());
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);

  // a single nonzero block k influences only blocks k and k+1, and the
  // result equals the sum of per-block applications (bitwise, LU solvers)
  std::vector<double> full(static_cast<std::size_t>(sys.Nt) * sys.Np, 0.0);
  std::vector<std::vector<double>> parts;
  for (int k = 1; k <= sys.Nt; ++k) {
    std::vector<double> rk(full.size(), 0.0);
    for (int i = 0; i < sys.Np; ++i) {
      const double v = dist(rng);
      rk[(k - 1) * sys.Np + i] = v;
      full[(k - 1) * sys.Np + i] = v;
    }
    parts.push_back(PT.apply_schur_inverse(rk));
    for (int j = 1; j <= sys.Nt; ++j) {
      if (j == k || j == k + 1) continue;
      for (int i = 0; i < sys.Np; ++i)
        CHECK(parts.back()[(j - 1) * sys.Np + i] == 0.0);
    }
  }
  const auto whole = PT.apply_schur_inverse(full);
  for (std::size_t i = 0; i < whole.size(); ++i) {
    double sum = 0.0;
    for (const auto& p : parts) sum += p[i];
    CHECK(whole[i] == doctest::Approx(sum).epsilon(1e-12).scale(1e-12));
  }
}

TEST_CASE("poiseuille at r=2, dt=1/2 lands in the expected band") {
  const ProblemSpec prob = make_problem(ProblemId::Poiseuille);
  const SpaceTimeSystem sys = assemble_system(prob, 2, 1);
  KrylovConfig kc;
  kc.tol = 1e-10;
  kc.max_iter = 100;
  const AllAtOnceResult res = solve_all_at_once(sys, PrecondConfig::ideal(), kc);
  CHECK(res.report.converged);
  // band absorbs mesh and BC handling differences
  CHECK(res.report.iterations >= 18);
  CHECK(res.report.iterations <= 40);
}

TEST_CASE("all-at-once solve: zero rhs converges in zero iterations") {
  ProblemSpec quiet = make_problem(ProblemId::Cavity);
  quiet.dirichlet = [](BoundaryTag, Vec2, double) { return Vec2{0.0, 0.0}; };
  const SpaceTimeSystem sys = assemble_system(quiet, 2, 2);
  KrylovConfig kc;
  const AllAtOnceResult res = solve_all_at_once(sys, PrecondConfig::ideal(), kc);
  CHECK(res.report.converged);
  CHECK(res.report.iterations == 0);
}

TEST_CASE("exact-Schur hook yields convergence in at most two iterations") {
  for (ProblemId id : {ProblemId::Cavity, ProblemId::Poiseuille}) {
    const ProblemSpec prob = make_problem(id);
    const SpaceTimeSystem sys = assemble_system(prob, 1, 1);  // Nt = 2
    const ExactSchurPreconditioner M(sys);
    const LinearOperator Mop = M.as_linear_operator();
    LinearOperator A = [&sys](std::span<const double> x, std::span<double> y) {
      SpaceTimeVector xv = sys.zero_vector();
      std::copy(x.begin(), x.end(), xv.data.begin());
      const SpaceTimeVector yv = apply_spacetime_operator(sys, xv);
      std::copy(yv.data.begin(), yv.data.end(), y.begin());
    };
    SpaceTimeVector x = sys.initial_guess();
    KrylovConfig kc;
    kc.tol = 1e-10;
    kc.max_iter = 10;
    const SolveReport rep = gmres(A, sys.rhs.data, x.data, kc, &Mop);
    CHECK(rep.converged);
    CHECK(rep.iterations <= 2);
  }
}

TEST_CASE("sequential stepping with Nt=1 reproduces the all-at-once solve") {
  const ProblemSpec prob = make_problem(ProblemId::Cavity);
  const SpaceTimeSystem sys = assemble_system(prob, 2, 0);
  REQUIRE(sys.Nt == 1);
  KrylovConfig kc;
  kc.tol = 1e-10;
  const AllAtOnceResult st = solve_all_at_once(sys, PrecondConfig::ideal(), kc);
  const TimeSteppingResult ts =
      sequential_time_stepping(sys, PrecondConfig::ideal(), 1e-10);
  CHECK(ts.step_iterations.size() == 1);
  CHECK(ts.step_iterations[0] == st.report.iterations);
  for (std::size_t i = 0; i < sys.rhs.size(); ++i)
    CHECK(ts.x.data[i] == doctest::Approx(st.x.data[i]).epsilon(1e-12).scale(1e-12));
}

TEST_CASE("stitched sequential solution satisfies the global tolerance") {
  const ProblemSpec prob = make_problem(ProblemId::Poiseuille);
  const SpaceTimeSystem sys = assemble_system(prob, 2, 3);  // Nt = 8
  const double tol = 1e-8;
  const TimeSteppingResult ts =
      sequential_time_stepping(sys, PrecondConfig::ideal(), tol);
  CHECK(relative_residual(sys, ts.x) <= tol);
}

TEST_CASE("preconditioned Schur eigenvalues: input validation and deflation") {
  const ProblemSpec prob = make_problem(ProblemId::Cavity);
  const SpaceTimeSystem sys = assemble_system(prob, 2, 1);
  CHECK_THROWS_AS(preconditioned_schur_eigs(sys, 0), std::invalid_argument);
  CHECK_THROWS_AS(preconditioned_schur_eigs(sys, 99), std::invalid_argument);

  const auto eigs = preconditioned_schur_eigs(sys, 1);
  // the deflated constant mode is excluded from the output
  CHECK(static_cast<int>(eigs.size()) == sys.Np - 1);
  for (const auto& ev : eigs) CHECK(std::abs(ev) > 1e-3);

  // outflow problem: nothing deflated
  const SpaceTimeSystem pois =
      assemble_system(make_problem(ProblemId::Poiseuille), 2, 1);
  CHECK(static_cast<int>(preconditioned_schur_eigs(pois, 1).size()) == pois.Np);
}

TEST_CASE("Schur spectrum stays away from zero in the large-dt limit") {
  // dt -> infinity: the mass term fades and the spectrum must remain
  // bounded away from the origin
  ProblemSpec prob = make_problem(ProblemId::Cavity);
  prob.t_end = 1024.0;  // dt = 2^10 with dt_exp = -10
  const SpaceTimeSystem sys = assemble_system(prob, 2, -10);
  REQUIRE(sys.Nt == 1);
  CHECK(sys.dt == 1024.0);
  const auto eigs = preconditioned_schur_eigs(sys, 1);
  for (const auto& ev : eigs) CHECK(ev.real() > 0.05);
}
