#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "stflow/picard.hpp"

using namespace stflow;

TEST_CASE("poiseuille NS converges at the first Picard iteration") {
  // the advection term vanishes on the analytical solution
  const ProblemSpec prob = make_problem(ProblemId::Poiseuille);
  const PicardResult res =
      picard_solve(prob, 2, 2, PrecondConfig::ideal(), 1e-9, 10);
  CHECK(res.converged);
  CHECK(res.outer_iterations == 1);
}

TEST_CASE("infinite tolerance returns after one linear solve") {
  const ProblemSpec prob = make_problem(ProblemId::Cavity);
  const PicardResult res =
      picard_solve(prob, 2, 1, PrecondConfig::ideal(),
                   std::numeric_limits<double>::infinity(), 10);
  CHECK(res.converged);
  CHECK(res.outer_iterations == 1);
}

TEST_CASE("zero-amplitude cavity is a Stokes fixed point") {
  ProblemSpec quiet = make_problem(ProblemId::Cavity);
  quiet.dirichlet = [](BoundaryTag, Vec2, double) { return Vec2{0.0, 0.0}; };
  const PicardResult res =
      picard_solve(quiet, 2, 1, PrecondConfig::ideal(), 1e-9, 10);
  CHECK(res.converged);
  CHECK(res.outer_iterations == 1);
  CHECK(res.mean_inner_iterations == 0.0);
}

TEST_CASE("cavity NS at r=2, dt=1/2 stays inside the expected bands") {
  const ProblemSpec prob = make_problem(ProblemId::Cavity);
  const PicardResult res =
      picard_solve(prob, 2, 1, PrecondConfig::ideal(), 1e-9, 20);
  CHECK(res.converged);
  CHECK(res.outer_iterations >= 3);
  CHECK(res.outer_iterations <= 7);
  CHECK(res.mean_inner_iterations >= 7.0);
  CHECK(res.mean_inner_iterations <= 18.0);

  // nonlinear residuals decrease strictly until convergence
  const auto& hist = res.nonlinear_residual_history;
  REQUIRE(hist.size() >= 2);
  for (std::size_t i = 1; i < hist.size(); ++i) CHECK(hist[i] < hist[i - 1]);
}

TEST_CASE("the fixed point satisfies its own linearised system") {
  const ProblemSpec prob = make_problem(ProblemId::Cavity);
  const double nl_tol = 1e-9;
  const PicardResult res =
      picard_solve(prob, 2, 2, PrecondConfig::ideal(), nl_tol, 20);
  REQUIRE(res.converged);
  CHECK(res.nonlinear_residual_history.back() <= nl_tol);
}

TEST_CASE("outer Picard counts are mesh-independent") {
  const ProblemSpec prob = make_problem(ProblemId::Cavity);
  int lo = 100, hi = 0;
  for (int r : {2, 3}) {
    for (int dt_exp : {1, 2}) {
      const PicardResult res =
          picard_solve(prob, r, dt_exp, PrecondConfig::ideal(), 1e-9, 20);
      REQUIRE(res.converged);
      lo = std::min(lo, res.outer_iterations);
      hi = std::max(hi, res.outer_iterations);
    }
  }
  CHECK(hi - lo <= 2);
}

TEST_CASE("glazing cannot be fed to the nonlinear solver") {
  const ProblemSpec prob = make_problem(ProblemId::DoubleGlazing, 10.0);
  CHECK_THROWS_AS(picard_solve(prob, 2, 1, PrecondConfig::ideal(), 1e-9, 5),
                  std::invalid_argument);
}
