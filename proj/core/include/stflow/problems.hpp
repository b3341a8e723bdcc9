#ifndef STFLOW_PROBLEMS_HPP
#define STFLOW_PROBLEMS_HPP

#include <functional>
#include <optional>
#include <string>

#include "stflow/fem.hpp"
#include "stflow/mesh.hpp"

namespace stflow {

enum class ProblemId { Cavity, Poiseuille, BackStep, DoubleGlazing };

ProblemId problem_from_string(const std::string& name);
std::string to_string(ProblemId id);

/// One of the four model flow configurations on t in [0,1], viscosity 1.
/// Dirichlet profiles ramp up linearly from a quiet state, so all boundary
/// data vanishes at t = 0; the initial condition is zero.
struct ProblemSpec {
  ProblemId id;
  double mu = 1.0;
  double t_begin = 0.0;
  double t_end = 1.0;
  double peclet = 0.0;  // DoubleGlazing only

  std::function<TriMesh(int)> mesh_builder;  // refinement level -> mesh
  DirichletData dirichlet;                   // (tag, x, t) -> velocity
  std::function<Vec2(Vec2, double)> forcing;
  std::function<Vec2(Vec2, double)> neumann;  // outflow traction; null = zero
  std::function<Vec2(Vec2)> initial_velocity;  // null = quiet start
  std::function<Vec2(Vec2, double)> wind;  // zero for the Stokes problems
  bool has_wind = false;
  bool enclosed = false;  // Dirichlet on the whole boundary

  /// Poiseuille only: p = 8(1-x) as printed rather than the time-consistent
  /// 8t(1-x) used by default.
  bool paper_pressure = false;
};

/// Build one of the four model problems. pe is required for DoubleGlazing
/// and ignored otherwise.
ProblemSpec make_problem(ProblemId id, double pe = 0.0);

struct ExactSolution {
  std::function<Vec2(Vec2, double)> velocity;
  std::function<double(Vec2, double)> pressure;
};

/// Analytic solution where available (Poiseuille); empty otherwise.
std::optional<ExactSolution> exact_solution(const ProblemSpec& problem);

/// Grid Peclet number dx*Pe/L with L = 1; zero for the Stokes problems.
double grid_peclet(const ProblemSpec& problem, double dx);

}  // namespace stflow

#endif  // STFLOW_PROBLEMS_HPP
