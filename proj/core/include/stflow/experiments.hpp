#ifndef STFLOW_EXPERIMENTS_HPP
#define STFLOW_EXPERIMENTS_HPP

#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "stflow/picard.hpp"
#include "stflow/spacetime.hpp"

namespace stflow {

/// One grid cell of an experiment. Non-convergence is encoded as
/// outer_iters = -1 with converged = false; skipped/failed cells carry the
/// reason in status.
struct ExperimentCell {
  std::string cell_id;
  std::string problem;
  int r = 0;
  double dt = 0.0;
  double pe = 0.0;
  std::string mode = "ideal";
  int outer_iters = 0;
  double mean_inner_iters = std::numeric_limits<double>::quiet_NaN();
  double ratio = std::numeric_limits<double>::quiet_NaN();
  bool converged = true;
  std::string status = "ok";
  std::vector<double> residual_history;
  std::vector<std::complex<double>> eigenvalues;
};

struct ExperimentReport {
  std::string experiment;
  double tol = 0.0;
  std::string timestamp;  // metadata only, excluded from the CSV artefacts
  std::vector<ExperimentCell> cells;

  const ExperimentCell* find(const std::string& cell_id) const;
};

/// Desk-scale guards; cells beyond them are marked skipped.
struct DeskScaleCaps {
  int max_r = 6;
  int max_nt = 64;
  long max_dofs = 40'000'000;
};

ExperimentReport run_table1(const std::vector<ProblemId>& problems,
                            const std::vector<int>& rs,
                            const std::vector<int>& dt_exps,
                            const std::string& mode, double tol = 1e-10,
                            double glazing_pe = 10.0,
                            const DeskScaleCaps& caps = {});

ExperimentReport run_table2_peclet(const std::vector<int>& rs,
                                   const std::vector<int>& dt_exps,
                                   const std::vector<double>& pes,
                                   double tol = 1e-10,
                                   const DeskScaleCaps& caps = {});

ExperimentReport run_inner_tolerance_sweep(
    const std::vector<ProblemId>& problems, int r, int dt_exp,
    const std::vector<double>& inner_tols, double tol = 1e-10,
    double glazing_pe = 10.0, const DeskScaleCaps& caps = {});

ExperimentReport run_table4_ratio(const std::vector<ProblemId>& problems,
                                  const std::vector<int>& rs,
                                  const std::vector<int>& dt_exps,
                                  double tol = 1e-10, double glazing_pe = 10.0,
                                  const DeskScaleCaps& caps = {});

/// k = -1 selects the final time step (strongest wind under the ramp).
ExperimentReport run_eigs_figure(const std::vector<double>& pes,
                                 const std::vector<int>& rs,
                                 const std::vector<int>& dt_exps, int k = -1,
                                 const DeskScaleCaps& caps = {});

ExperimentReport run_table3_navier_stokes(ProblemId problem,
                                          const std::vector<int>& rs,
                                          const std::vector<int>& dt_exps,
                                          double nl_tol = 1e-9,
                                          double tol = 1e-10,
                                          const DeskScaleCaps& caps = {});

// --- report serialisation ---

/// Main table, schema:
/// problem,r,dt,pe,mode,outer_iters,mean_inner_iters,ratio,converged
std::string write_csv(const ExperimentReport& report);
/// Long-format residual histories: cell_id,iter,relres
std::string write_residuals_csv(const ExperimentReport& report);
/// Long-format eigenvalue scatter: cell_id,re,im
std::string write_eigs_csv(const ExperimentReport& report);

ExperimentReport parse_csv(const std::string& text);
void parse_residuals_csv(const std::string& text, ExperimentReport& report);
void parse_eigs_csv(const std::string& text, ExperimentReport& report);

std::string write_json(const ExperimentReport& report);
ExperimentReport parse_json(const std::string& text);

/// Cell-level equality (metadata such as the timestamp is ignored).
bool same_cells(const ExperimentReport& a, const ExperimentReport& b);

}  // namespace stflow

#endif  // STFLOW_EXPERIMENTS_HPP
