#include "stflow/picard.hpp"

#include <cmath>
#include <stdexcept>

namespace stflow {

PicardResult picard_solve(const ProblemSpec& problem, int r, int dt_exp,
                          const PrecondConfig& pc, double nl_tol, int max_outer,
                          double linear_tol, int linear_max_iter) {
  if (problem.id == ProblemId::DoubleGlazing)
    throw std::invalid_argument(
        "picard_solve: glazing is already a linearisation");
  if (!(nl_tol > 0.0) && !std::isinf(nl_tol))
    throw std::invalid_argument("picard_solve: nl_tol must be positive");

  const SpatialDiscretisation disc = discretise(problem, r);

  // the nonlinear problem drops the prescribed wind: w = u
  ProblemSpec linearised = problem;
  linearised.has_wind = false;

  PicardResult result;
  SpaceTimeSystem sys = assemble_system(linearised, disc, dt_exp);  // Stokes
  SpaceTimeVector x = sys.initial_guess();
  result.nonlinear_residual_history.push_back(relative_residual(sys, x));

  for (int outer = 1; outer <= max_outer; ++outer) {
    KrylovConfig kc;
    kc.tol = linear_tol;
    kc.max_iter = linear_max_iter;
    kc.flexible = pc.any_iterative();
    const PTPreconditioner PT(sys, pc);
    LinearOperator A = [&sys](std::span<const double> xv, std::span<double> yv) {
      SpaceTimeVector tmp = sys.zero_vector();
      std::copy(xv.begin(), xv.end(), tmp.data.begin());
      SpaceTimeVector out = apply_spacetime_operator(sys, tmp);
      std::copy(out.data.begin(), out.data.end(), yv.begin());
    };
    LinearOperator M = [&PT, &sys](std::span<const double> xv,
                                   std::span<double> yv) {
      SpaceTimeVector tmp = sys.zero_vector();
      std::copy(xv.begin(), xv.end(), tmp.data.begin());
      SpaceTimeVector out = PT.apply(tmp);
      std::copy(out.data.begin(), out.data.end(), yv.begin());
    };
    // warm start from the previous iterate (Dirichlet data unchanged)
    const SolveReport rep = gmres(A, sys.rhs.data, x.data, kc, &M);
    result.inner_iteration_counts.push_back(rep.iterations);
    result.outer_iterations = outer;

    // re-linearise around the new iterate and measure the residual there
    std::vector<std::shared_ptr<const WindEvaluator>> winds(sys.Nt);
    for (int k = 1; k <= sys.Nt; ++k) {
      std::vector<double> uk(x.u(k).begin(), x.u(k).end());
      winds[k - 1] = std::make_shared<FEWind>(disc.spaces, std::move(uk));
    }
    WindProvider provider = [&winds](int k, double) {
      return winds[k - 1];
    };
    sys = assemble_system(linearised, disc, dt_exp, &provider);

    const double nl_res = relative_residual(sys, x);
    result.nonlinear_residual_history.push_back(nl_res);
    if (nl_res <= nl_tol) {
      result.converged = true;
      break;
    }
  }

  result.x = std::move(x);
  double total = 0.0;
  for (int it : result.inner_iteration_counts) total += it;
  result.mean_inner_iterations =
      total / static_cast<double>(result.inner_iteration_counts.size());
  return result;
}

}  // namespace stflow
