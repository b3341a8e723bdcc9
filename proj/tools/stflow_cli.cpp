// Experiment driver for the all-at-once incompressible flow solver.
//
// Subcommands mirror the experiment reports: solve a single configuration,
// sweep the iteration-count tables, the Peclet table, the Picard table, the
// time-stepping comparison, the inner-tolerance study, or dump the
// preconditioned Schur eigenvalues.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stflow/experiments.hpp"
#include "stflow/picard.hpp"
#include "stflow/problems.hpp"
#include "stflow/spacetime.hpp"

using namespace stflow;

namespace {

struct CommonOpts {
  std::string problem = "cavity";
  std::vector<int> r{2, 3, 4};
  std::vector<int> dt_exp{2, 3, 4};
  std::vector<double> pe{16, 32, 64, 128, 256};
  std::string mode = "ideal";
  double tol = 1e-10;
  std::string out;
  std::string format = "csv";
  std::string vtk;
  bool navier_stokes = false;
  bool paper_pressure = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--problem", o.problem, "cavity|poiseuille|backstep|glazing");
  cmd->add_option("--r", o.r, "spatial refinement level(s), dx = 2^-r");
  cmd->add_option("--dt-exp", o.dt_exp, "time step exponent(s), dt = 2^-e");
  cmd->add_option("--pe", o.pe, "Peclet number(s) for glazing");
  cmd->add_option("--mode", o.mode, "solver mode: ideal|approx");
  cmd->add_option("--tol", o.tol, "outer relative residual tolerance");
  cmd->add_option("--out", o.out, "output path (stdout when omitted)");
  cmd->add_option("--format", o.format, "report format: csv|json");
  cmd->add_option("--vtk", o.vtk, "dump the mesh in legacy VTK ASCII");
  cmd->add_flag("--navier-stokes", o.navier_stokes,
                "resolve the nonlinearity with Picard iterations");
  cmd->add_flag("--paper-pressure", o.paper_pressure,
                "Poiseuille pressure 8(1-x) as printed instead of 8t(1-x)");
}

void emit(const ExperimentReport& report, const CommonOpts& o) {
  if (o.format == "json") {
    const std::string text = write_json(report);
    if (o.out.empty()) {
      std::cout << text << "\n";
    } else {
      std::ofstream f(o.out);
      f << text << "\n";
      std::fprintf(stderr, "wrote %s\n", o.out.c_str());
    }
    return;
  }
  if (o.format != "csv") throw CLI::ValidationError("--format must be csv|json");
  const std::string main_csv = write_csv(report);
  const std::string res_csv = write_residuals_csv(report);
  const std::string eig_csv = write_eigs_csv(report);
  if (o.out.empty()) {
    std::cout << main_csv;
    return;
  }
  std::ofstream f(o.out);
  f << main_csv;
  std::fprintf(stderr, "wrote %s\n", o.out.c_str());
  if (res_csv.size() > 22) {  // more than the header line
    std::ofstream rf(o.out + ".residuals.csv");
    rf << res_csv;
    std::fprintf(stderr, "wrote %s.residuals.csv\n", o.out.c_str());
  }
  if (eig_csv.size() > 12) {
    std::ofstream ef(o.out + ".eigs.csv");
    ef << eig_csv;
    std::fprintf(stderr, "wrote %s.eigs.csv\n", o.out.c_str());
  }
}

ProblemSpec build_problem(const CommonOpts& o, double pe) {
  ProblemSpec prob = make_problem(problem_from_string(o.problem), pe);
  prob.paper_pressure = o.paper_pressure;
  return prob;
}

int run_solve(const CommonOpts& o) {
  const double pe = o.problem == "glazing" ? o.pe.front() : 0.0;
  const ProblemSpec prob = build_problem(o, pe);
  const int r = o.r.front();
  const int dt_exp = o.dt_exp.front();

  if (!o.vtk.empty()) {
    write_vtk(prob.mesh_builder(r), o.vtk);
    std::fprintf(stderr, "wrote %s\n", o.vtk.c_str());
  }

  ExperimentReport report;
  report.experiment = "solve";
  report.tol = o.tol;
  ExperimentCell cell;
  cell.problem = o.problem;
  cell.r = r;
  cell.dt = std::pow(2.0, -dt_exp);
  cell.pe = pe;
  cell.mode = o.navier_stokes ? "navier-stokes" : o.mode;
  cell.cell_id = o.problem + "_solve";

  const PrecondConfig pc = o.mode == "approx" ? PrecondConfig::approximate()
                                              : PrecondConfig::ideal();
  if (o.navier_stokes) {
    const PicardResult res = picard_solve(prob, r, dt_exp, pc, 1e-9, 50, o.tol);
    cell.outer_iters = res.outer_iterations;
    cell.mean_inner_iters = res.mean_inner_iterations;
    cell.converged = res.converged;
    cell.residual_history = res.nonlinear_residual_history;
    std::fprintf(stderr,
                 "picard: %d outer iterations, %.2f mean inner, converged=%d\n",
                 res.outer_iterations, res.mean_inner_iterations,
                 res.converged);
  } else {
    const SpaceTimeSystem sys = assemble_system(prob, r, dt_exp);
    KrylovConfig kc;
    kc.tol = o.tol;
    kc.max_iter = 200;
    const AllAtOnceResult res = solve_all_at_once(sys, pc, kc);
    cell.outer_iters = res.report.converged ? res.report.iterations : -1;
    cell.converged = res.report.converged;
    if (!res.report.converged) cell.status = "nonconverged";
    cell.residual_history = res.report.residual_history;
    std::fprintf(stderr,
                 "%s r=%d dt=2^-%d: %d iterations, relres %.3e, dofs %d\n",
                 o.problem.c_str(), r, dt_exp, res.report.iterations,
                 res.report.residual_history.back(),
                 sys.Nt * (sys.Nu + sys.Np));
  }
  report.cells.push_back(std::move(cell));
  emit(report, o);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"all-at-once space-time solver for incompressible flow"};
  app.require_subcommand(1);

  CommonOpts o;
  CLI::App* solve = app.add_subcommand("solve", "solve one configuration");
  CLI::App* table1 =
      app.add_subcommand("table1", "iteration counts over the (r, dt) grid");
  CLI::App* table2 =
      app.add_subcommand("table2", "glazing iteration counts over Pe");
  CLI::App* table3 =
      app.add_subcommand("table3", "Picard counts for Navier-Stokes");
  CLI::App* table4 =
      app.add_subcommand("table4", "all-at-once vs sequential stepping ratio");
  CLI::App* eigs =
      app.add_subcommand("eigs", "preconditioned Schur eigenvalues");
  CLI::App* inner_tol =
      app.add_subcommand("inner-tol", "outer counts vs inner velocity tolerance");
  for (CLI::App* cmd : {solve, table1, table2, table3, table4, eigs, inner_tol})
    add_common(cmd, o);

  std::vector<double> inner_tols{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6,
                                 1e-8, 1e-10, 1e-12, 1e-13};
  inner_tol->add_option("--inner-tols", inner_tols, "inner GMRES tolerances");
  int eig_k = -1;
  eigs->add_option("--k", eig_k, "time-step index (default: final step)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return run_solve(o);
    if (table1->parsed()) {
      const std::vector<ProblemId> probs{problem_from_string(o.problem)};
      emit(run_table1(probs, o.r, o.dt_exp, o.mode, o.tol,
                      o.problem == "glazing" ? o.pe.front() : 10.0),
           o);
    } else if (table2->parsed()) {
      emit(run_table2_peclet(o.r, o.dt_exp, o.pe, o.tol), o);
    } else if (table3->parsed()) {
      emit(run_table3_navier_stokes(problem_from_string(o.problem), o.r,
                                    o.dt_exp, 1e-9, o.tol),
           o);
    } else if (table4->parsed()) {
      const std::vector<ProblemId> probs{problem_from_string(o.problem)};
      emit(run_table4_ratio(probs, o.r, o.dt_exp, o.tol,
                            o.problem == "glazing" ? o.pe.front() : 10.0),
           o);
    } else if (eigs->parsed()) {
      const std::vector<double> pes =
          o.problem == "glazing" ? o.pe : std::vector<double>{0.0};
      emit(run_eigs_figure(pes, o.r, o.dt_exp, eig_k), o);
    } else if (inner_tol->parsed()) {
      const std::vector<ProblemId> probs{problem_from_string(o.problem)};
      emit(run_inner_tolerance_sweep(probs, o.r.front(), o.dt_exp.front(),
                                     inner_tols, o.tol),
           o);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
