#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "stflow/fem.hpp"
#include "stflow/problems.hpp"
#include "stflow/sparse.hpp"

using namespace stflow;

TEST_CASE("cavity lid speed peaks at 1 in the middle at t=1") {
  const ProblemSpec p = make_problem(ProblemId::Cavity);
  const Vec2 u = p.dirichlet(BoundaryTag::Lid, {0.5, 1.0}, 1.0);
  CHECK(u[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(u[1] == 0.0);
}

TEST_CASE("all Dirichlet data vanishes at t=0") {
  for (ProblemId id : {ProblemId::Cavity, ProblemId::Poiseuille,
                       ProblemId::BackStep, ProblemId::DoubleGlazing}) {
    const ProblemSpec p = make_problem(id, 16.0);
    for (BoundaryTag tag : {BoundaryTag::Lid, BoundaryTag::Wall,
                            BoundaryTag::Inflow}) {
      for (double s : {0.0, 0.25, 0.7, 1.0}) {
        const Vec2 u = p.dirichlet(tag, {s, 1.0 - s}, 0.0);
        CHECK(u[0] == 0.0);
        CHECK(u[1] == 0.0);
      }
    }
  }
}

TEST_CASE("glazing wind vanishes at the centre and scales with Pe") {
  const ProblemSpec p = make_problem(ProblemId::DoubleGlazing, 10.0);
  const Vec2 w0 = p.wind({0.5, 0.5}, 1.0);
  CHECK(w0[0] == 0.0);
  CHECK(w0[1] == 0.0);
  const ProblemSpec p2 = make_problem(ProblemId::DoubleGlazing, 20.0);
  const Vec2 a = p.wind({0.25, 0.75}, 1.0);
  const Vec2 b = p2.wind({0.25, 0.75}, 1.0);
  CHECK(b[0] == doctest::Approx(2.0 * a[0]).epsilon(1e-14));
  CHECK(b[1] == doctest::Approx(2.0 * a[1]).epsilon(1e-14));
}

TEST_CASE("poiseuille exact solution values") {
  const ProblemSpec p = make_problem(ProblemId::Poiseuille);
  const auto sol = exact_solution(p);
  REQUIRE(sol.has_value());
  const Vec2 u = sol->velocity({0.3, 0.5}, 1.0);
  CHECK(u[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(u[1] == 0.0);
  const Vec2 u0 = sol->velocity({0.3, 0.5}, 0.0);
  CHECK(u0[0] == 0.0);

  // pressure drop across the channel is 8 at t=1, in both variants
  CHECK(sol->pressure({0.0, 0.5}, 1.0) - sol->pressure({1.0, 0.5}, 1.0) ==
        doctest::Approx(8.0).epsilon(1e-15));
  ProblemSpec paper = p;
  paper.paper_pressure = true;
  const auto sol_paper = exact_solution(paper);
  CHECK(sol_paper->pressure({0.0, 0.5}, 1.0) -
            sol_paper->pressure({1.0, 0.5}, 1.0) ==
        doctest::Approx(8.0).epsilon(1e-15));

  CHECK(!exact_solution(make_problem(ProblemId::Cavity)).has_value());
}

TEST_CASE("grid peclet arithmetic") {
  const ProblemSpec g16 = make_problem(ProblemId::DoubleGlazing, 16.0);
  CHECK(grid_peclet(g16, std::pow(2.0, -4)) == doctest::Approx(1.0));
  const ProblemSpec stokes = make_problem(ProblemId::Cavity);
  CHECK(grid_peclet(stokes, 0.25) == 0.0);
  const ProblemSpec g256 = make_problem(ProblemId::DoubleGlazing, 256.0);
  CHECK(grid_peclet(g256, std::pow(2.0, -6)) == doctest::Approx(4.0));
}

TEST_CASE("glazing wind is divergence-free") {
  const ProblemSpec p = make_problem(ProblemId::DoubleGlazing, 100.0);

  // pointwise, by central differences on the implemented field
  const double h = 1e-6;
  double wscale = 0.0;
  for (int i = 1; i < 10; ++i) {
    for (int j = 1; j < 10; ++j) {
      const double x = i / 10.0, y = j / 10.0;
      const double dwx =
          (p.wind({x + h, y}, 1.0)[0] - p.wind({x - h, y}, 1.0)[0]) / (2 * h);
      const double dwy =
          (p.wind({x, y + h}, 1.0)[1] - p.wind({x, y - h}, 1.0)[1]) / (2 * h);
      wscale = std::max(wscale, std::abs(p.wind({x, y}, 1.0)[0]));
      CHECK(std::abs(dwx + dwy) < 1e-4);  // fd truncation at Pe=100 scale
    }
  }
  CHECK(wscale > 1.0);  // the samples actually see the wind

  // weak form: int q div(w) = -int w.grad(q) for interior q, so the interior
  // entries of Wp^T 1 must vanish to quadrature accuracy (the wind is not
  // tangential on the walls, so boundary entries carry the flux)
  const FESpaces sp = build_spaces(unit_square_mesh(3));
  const AnalyticWind wind([&](Vec2 x) { return p.wind(x, 1.0); });
  const SparseMatrix Wp = assemble_pressure_advection(sp, wind);
  std::vector<double> div(sp.Np, 0.0);
  Wp.mult_transpose(std::vector<double>(sp.Np, 1.0), div);
  std::vector<char> on_boundary(sp.Np, 0);
  for (const auto& be : sp.mesh.boundary_edges) {
    on_boundary[be.v0] = 1;
    on_boundary[be.v1] = 1;
  }
  for (int v = 0; v < sp.Np; ++v)
    if (!on_boundary[v]) CHECK(std::abs(div[v]) < 1e-11);
}

TEST_CASE("problem ids round-trip through strings") {
  for (ProblemId id : {ProblemId::Cavity, ProblemId::Poiseuille,
                       ProblemId::BackStep, ProblemId::DoubleGlazing})
    CHECK(problem_from_string(to_string(id)) == id);
  CHECK_THROWS(problem_from_string("vortex"));
}
