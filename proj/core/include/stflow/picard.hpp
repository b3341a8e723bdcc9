#ifndef STFLOW_PICARD_HPP
#define STFLOW_PICARD_HPP

#include "stflow/spacetime.hpp"

namespace stflow {

struct PicardResult {
  SpaceTimeVector x;
  int outer_iterations = 0;
  double mean_inner_iterations = 0.0;
  std::vector<int> inner_iteration_counts;
  std::vector<double> nonlinear_residual_history;
  bool converged = false;
};

/// Picard iteration for Navier-Stokes: each outer step re-linearises the
/// space-time system around the previous velocity iterate (zero wind on the
/// first step, so the first solve is Stokes) and solves it all at once.
/// Stops when the relative space-time residual of the system linearised at
/// the current iterate drops below nl_tol.
PicardResult picard_solve(const ProblemSpec& problem, int r, int dt_exp,
                          const PrecondConfig& pc, double nl_tol, int max_outer,
                          double linear_tol = 1e-10, int linear_max_iter = 200);

}  // namespace stflow

#endif  // STFLOW_PICARD_HPP
