#include "stflow/problems.hpp"

#include <stdexcept>

namespace stflow {

ProblemId problem_from_string(const std::string& name) {
  if (name == "cavity") return ProblemId::Cavity;
  if (name == "poiseuille") return ProblemId::Poiseuille;
  if (name == "backstep") return ProblemId::BackStep;
  if (name == "glazing") return ProblemId::DoubleGlazing;
  throw std::invalid_argument("unknown problem: " + name);
}

std::string to_string(ProblemId id) {
  switch (id) {
    case ProblemId::Cavity: return "cavity";
    case ProblemId::Poiseuille: return "poiseuille";
    case ProblemId::BackStep: return "backstep";
    case ProblemId::DoubleGlazing: return "glazing";
  }
  return "?";
}

namespace {

Vec2 zero_field(Vec2, double) { return {0.0, 0.0}; }

double lid_profile(double x, double t) {
  return 8.0 * t * x * (1.0 - x) * (2.0 * x * x - 2.0 * x + 1.0);
}

double inflow_profile(double y, double t) { return 4.0 * t * y * (1.0 - y); }

TriMesh poiseuille_mesh(int r) {
  TriMesh mesh = unit_square_mesh(r);
  // retarget tags: Inflow on x=0, Outflow on x=1, Wall on y in {0,1}
  for (auto& be : mesh.boundary_edges) {
    const auto& a = mesh.vertices[be.v0];
    const auto& b = mesh.vertices[be.v1];
    if (a[0] == 0.0 && b[0] == 0.0)
      be.tag = BoundaryTag::Inflow;
    else if (a[0] == 1.0 && b[0] == 1.0)
      be.tag = BoundaryTag::Outflow;
    else
      be.tag = BoundaryTag::Wall;
  }
  return mesh;
}

}  // namespace

ProblemSpec make_problem(ProblemId id, double pe) {
  ProblemSpec p;
  p.id = id;
  p.forcing = zero_field;
  p.wind = zero_field;
  switch (id) {
    case ProblemId::Cavity:
      p.enclosed = true;
      p.mesh_builder = unit_square_mesh;
      p.dirichlet = [](BoundaryTag tag, Vec2 x, double t) -> Vec2 {
        if (tag == BoundaryTag::Lid) return {lid_profile(x[0], t), 0.0};
        return {0.0, 0.0};
      };
      break;
    case ProblemId::Poiseuille:
      p.mesh_builder = poiseuille_mesh;
      p.dirichlet = [](BoundaryTag tag, Vec2 x, double t) -> Vec2 {
        if (tag == BoundaryTag::Inflow) return {inflow_profile(x[1], t), 0.0};
        return {0.0, 0.0};
      };
      p.forcing = [](Vec2 x, double) -> Vec2 {
        return {4.0 * x[1] * (1.0 - x[1]), 0.0};
      };
      break;
    case ProblemId::BackStep:
      p.mesh_builder = backstep_mesh;
      p.dirichlet = [](BoundaryTag tag, Vec2 x, double t) -> Vec2 {
        if (tag == BoundaryTag::Inflow) return {inflow_profile(x[1], t), 0.0};
        return {0.0, 0.0};
      };
      break;
    case ProblemId::DoubleGlazing: {
      if (!(pe >= 0.0))
        throw std::invalid_argument("make_problem: Pe required for glazing");
      p.enclosed = true;
      p.peclet = pe;
      p.mesh_builder = unit_square_mesh;
      p.dirichlet = [](BoundaryTag tag, Vec2 x, double t) -> Vec2 {
        if (tag == BoundaryTag::Lid) return {lid_profile(x[0], t), 0.0};
        return {0.0, 0.0};
      };
      const double mu = p.mu;
      p.wind = [pe, mu](Vec2 x, double t) -> Vec2 {
        const double cx = 2.0 * x[0] - 1.0;
        const double cy = 2.0 * x[1] - 1.0;
        return {-2.0 * t * cy * cx * cx * mu * pe,
                2.0 * t * cx * cy * cy * mu * pe};
      };
      p.has_wind = pe > 0.0;
      break;
    }
  }
  return p;
}

std::optional<ExactSolution> exact_solution(const ProblemSpec& problem) {
  if (problem.id != ProblemId::Poiseuille) return std::nullopt;
  ExactSolution sol;
  sol.velocity = [](Vec2 x, double t) -> Vec2 {
    return {4.0 * t * x[1] * (1.0 - x[1]), 0.0};
  };
  if (problem.paper_pressure)
    sol.pressure = [](Vec2 x, double) { return 8.0 * (1.0 - x[0]); };
  else
    sol.pressure = [](Vec2 x, double t) { return 8.0 * t * (1.0 - x[0]); };
  return sol;
}

double grid_peclet(const ProblemSpec& problem, double dx) {
  return dx * problem.peclet;
}

}  // namespace stflow
