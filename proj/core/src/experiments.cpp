#include "stflow/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <new>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace stflow {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string now_string() {
  const auto t = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", std::gmtime(&t));
  return buf;
}

std::string make_cell_id(const std::string& problem, int r, int dt_exp,
                         double pe, const std::string& extra = "") {
  std::ostringstream os;
  os << problem << "_r" << r << "_dtexp" << dt_exp;
  if (pe > 0.0) os << "_pe" << pe;
  if (!extra.empty()) os << "_" << extra;
  return os.str();
}

long projected_dofs(const ProblemSpec& prob, int r, int dt_exp) {
  // cells per unit area: 2*4^r on the unit square, 15x that on the L-shape
  const long n = 1L << r;
  const long units = prob.id == ProblemId::BackStep ? 15 : 1;
  const long vertices = units * (n + 1) * (n + 1);
  const long nu = 2 * (vertices + 3L * units * n * n);
  const long nt = 1L << dt_exp;
  return nt * (nu + vertices);
}

bool apply_caps(const ProblemSpec& prob, int r, int dt_exp,
                const DeskScaleCaps& caps, ExperimentCell& cell) {
  const long nt = 1L << dt_exp;
  if (r > caps.max_r || nt > caps.max_nt ||
      projected_dofs(prob, r, dt_exp) > caps.max_dofs) {
    cell.status = "skipped:desk-scale cap";
    cell.converged = false;
    cell.outer_iters = -1;
    return false;
  }
  return true;
}

PrecondConfig mode_config(const std::string& mode) {
  if (mode == "ideal") return PrecondConfig::ideal();
  if (mode == "approx") return PrecondConfig::approximate();
  throw std::invalid_argument("unknown solver mode: " + mode);
}

void run_single(const ProblemSpec& prob, int r, int dt_exp,
                const PrecondConfig& pc, double tol, int max_iter,
                ExperimentCell& cell) {
  try {
    const SpaceTimeSystem sys = assemble_system(prob, r, dt_exp);
    KrylovConfig kc;
    kc.tol = tol;
    kc.max_iter = max_iter;
    const AllAtOnceResult res = solve_all_at_once(sys, pc, kc);
    cell.residual_history = res.report.residual_history;
    if (res.report.converged) {
      cell.outer_iters = res.report.iterations;
      cell.converged = true;
    } else {
      cell.outer_iters = -1;
      cell.converged = false;
      cell.status = "nonconverged";
    }
  } catch (const std::bad_alloc&) {
    cell.outer_iters = -1;
    cell.converged = false;
    cell.status = "skipped:out-of-memory";
  }
}

}  // namespace

const ExperimentCell* ExperimentReport::find(const std::string& cell_id) const {
  for (const auto& c : cells)
    if (c.cell_id == cell_id) return &c;
  return nullptr;
}

ExperimentReport run_table1(const std::vector<ProblemId>& problems,
                            const std::vector<int>& rs,
                            const std::vector<int>& dt_exps,
                            const std::string& mode, double tol,
                            double glazing_pe, const DeskScaleCaps& caps) {
  ExperimentReport report;
  report.experiment = "table1";
  report.tol = tol;
  report.timestamp = now_string();
  const PrecondConfig pc = mode_config(mode);
  for (ProblemId id : problems) {
    const double pe = id == ProblemId::DoubleGlazing ? glazing_pe : 0.0;
    const ProblemSpec prob = make_problem(id, pe);
    for (int r : rs) {
      for (int dt_exp : dt_exps) {
        ExperimentCell cell;
        cell.problem = to_string(id);
        cell.r = r;
        cell.dt = std::pow(2.0, -dt_exp);
        cell.pe = pe;
        cell.mode = mode;
        cell.cell_id = make_cell_id(cell.problem, r, dt_exp, pe);
        if (apply_caps(prob, r, dt_exp, caps, cell)) {
          run_single(prob, r, dt_exp, pc, tol, 100, cell);
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }
  return report;
}

ExperimentReport run_table2_peclet(const std::vector<int>& rs,
                                   const std::vector<int>& dt_exps,
                                   const std::vector<double>& pes, double tol,
                                   const DeskScaleCaps& caps) {
  ExperimentReport report;
  report.experiment = "table2";
  report.tol = tol;
  report.timestamp = now_string();
  const PrecondConfig pc = PrecondConfig::ideal();
  for (int r : rs) {
    for (int dt_exp : dt_exps) {
      for (double pe : pes) {
        const ProblemSpec prob = make_problem(ProblemId::DoubleGlazing, pe);
        ExperimentCell cell;
        cell.problem = to_string(prob.id);
        cell.r = r;
        cell.dt = std::pow(2.0, -dt_exp);
        cell.pe = pe;
        cell.cell_id = make_cell_id(cell.problem, r, dt_exp, pe);
        if (apply_caps(prob, r, dt_exp, caps, cell)) {
          run_single(prob, r, dt_exp, pc, tol, 100, cell);
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }
  return report;
}

ExperimentReport run_inner_tolerance_sweep(
    const std::vector<ProblemId>& problems, int r, int dt_exp,
    const std::vector<double>& inner_tols, double tol, double glazing_pe,
    const DeskScaleCaps& caps) {
  ExperimentReport report;
  report.experiment = "inner-tol";
  report.tol = tol;
  report.timestamp = now_string();
  for (ProblemId id : problems) {
    const double pe = id == ProblemId::DoubleGlazing ? glazing_pe : 0.0;
    const ProblemSpec prob = make_problem(id, pe);
    for (double itol : inner_tols) {
      PrecondConfig pc = PrecondConfig::ideal();
      pc.velocity = PrecondConfig::Velocity::InnerKrylov;
      pc.inner_tol = itol;
      ExperimentCell cell;
      cell.problem = to_string(id);
      cell.r = r;
      cell.dt = std::pow(2.0, -dt_exp);
      cell.pe = pe;
      cell.mode = "approx:itol=" + fmt_double(itol);
      cell.cell_id =
          make_cell_id(cell.problem, r, dt_exp, pe, "itol" + fmt_double(itol));
      if (apply_caps(prob, r, dt_exp, caps, cell)) {
        run_single(prob, r, dt_exp, pc, tol, 100, cell);
      }
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

ExperimentReport run_table4_ratio(const std::vector<ProblemId>& problems,
                                  const std::vector<int>& rs,
                                  const std::vector<int>& dt_exps, double tol,
                                  double glazing_pe, const DeskScaleCaps& caps) {
  ExperimentReport report;
  report.experiment = "table4";
  report.tol = tol;
  report.timestamp = now_string();
  const PrecondConfig pc = PrecondConfig::ideal();
  for (ProblemId id : problems) {
    const double pe = id == ProblemId::DoubleGlazing ? glazing_pe : 0.0;
    const ProblemSpec prob = make_problem(id, pe);
    for (int r : rs) {
      for (int dt_exp : dt_exps) {
        ExperimentCell cell;
        cell.problem = to_string(id);
        cell.r = r;
        cell.dt = std::pow(2.0, -dt_exp);
        cell.pe = pe;
        cell.cell_id = make_cell_id(cell.problem, r, dt_exp, pe);
        if (apply_caps(prob, r, dt_exp, caps, cell)) {
          try {
            const SpaceTimeSystem sys = assemble_system(prob, r, dt_exp);
            KrylovConfig kc;
            kc.tol = tol;
            kc.max_iter = 200;
            const AllAtOnceResult st = solve_all_at_once(sys, pc, kc);
            const TimeSteppingResult ts = sequential_time_stepping(sys, pc, tol);
            if (!st.report.converged) {
              cell.outer_iters = -1;
              cell.converged = false;
              cell.status = "nonconverged";
            } else {
              cell.outer_iters = st.report.iterations;
              cell.mean_inner_iters = ts.mean_iterations;
              cell.ratio = st.report.iterations / ts.mean_iterations;
              cell.converged = true;
            }
          } catch (const std::bad_alloc&) {
            cell.outer_iters = -1;
            cell.converged = false;
            cell.status = "skipped:out-of-memory";
          } catch (const std::exception& e) {
            cell.outer_iters = -1;
            cell.converged = false;
            cell.status = std::string("failed:") + e.what();
          }
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }
  return report;
}

ExperimentReport run_eigs_figure(const std::vector<double>& pes,
                                 const std::vector<int>& rs,
                                 const std::vector<int>& dt_exps, int k,
                                 const DeskScaleCaps& caps) {
  ExperimentReport report;
  report.experiment = "eigs";
  report.timestamp = now_string();
  for (double pe : pes) {
    const ProblemSpec prob =
        pe > 0.0 ? make_problem(ProblemId::DoubleGlazing, pe)
                 : make_problem(ProblemId::Cavity);
    for (int r : rs) {
      for (int dt_exp : dt_exps) {
        ExperimentCell cell;
        cell.problem = to_string(prob.id);
        cell.r = r;
        cell.dt = std::pow(2.0, -dt_exp);
        cell.pe = pe;
        cell.mode = "eigs";
        cell.cell_id = make_cell_id(cell.problem, r, dt_exp, pe, "eigs");
        if (apply_caps(prob, r, dt_exp, caps, cell)) {
          try {
            const SpaceTimeSystem sys = assemble_system(prob, r, dt_exp);
            const int kk = k < 1 ? sys.Nt : k;
            cell.eigenvalues = preconditioned_schur_eigs(sys, kk);
            cell.converged = true;
          } catch (const std::exception& e) {
            cell.converged = false;
            cell.outer_iters = -1;
            cell.status = std::string("failed:") + e.what();
          }
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }
  return report;
}

ExperimentReport run_table3_navier_stokes(ProblemId problem,
                                          const std::vector<int>& rs,
                                          const std::vector<int>& dt_exps,
                                          double nl_tol, double tol,
                                          const DeskScaleCaps& caps) {
  if (problem != ProblemId::Cavity && problem != ProblemId::BackStep)
    throw std::invalid_argument("table3: Navier-Stokes variants are cavity/backstep");
  ExperimentReport report;
  report.experiment = "table3";
  report.tol = nl_tol;
  report.timestamp = now_string();
  const ProblemSpec prob = make_problem(problem);
  const PrecondConfig pc = PrecondConfig::ideal();
  for (int r : rs) {
    for (int dt_exp : dt_exps) {
      ExperimentCell cell;
      cell.problem = to_string(problem);
      cell.r = r;
      cell.dt = std::pow(2.0, -dt_exp);
      cell.mode = "navier-stokes";
      cell.cell_id = make_cell_id(cell.problem, r, dt_exp, 0.0, "ns");
      if (apply_caps(prob, r, dt_exp, caps, cell)) {
        try {
          const PicardResult res =
              picard_solve(prob, r, dt_exp, pc, nl_tol, 50, tol);
          cell.outer_iters = res.outer_iterations;
          cell.mean_inner_iters = res.mean_inner_iterations;
          cell.converged = res.converged;
          if (!res.converged) {
            cell.status = "nonconverged";
            cell.outer_iters = -1;
          }
          cell.residual_history = res.nonlinear_residual_history;
        } catch (const std::bad_alloc&) {
          cell.outer_iters = -1;
          cell.converged = false;
          cell.status = "skipped:out-of-memory";
        } catch (const std::exception& e) {
          cell.outer_iters = -1;
          cell.converged = false;
          cell.status = std::string("failed:") + e.what();
        }
      }
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

// --- serialisation ---

std::string write_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << "problem,r,dt,pe,mode,outer_iters,mean_inner_iters,ratio,converged\n";
  for (const auto& c : report.cells) {
    os << c.problem << "," << c.r << "," << fmt_double(c.dt) << ","
       << fmt_double(c.pe) << "," << c.mode << "," << c.outer_iters << ","
       << fmt_double(c.mean_inner_iters) << "," << fmt_double(c.ratio) << ",";
    if (c.status == "ok")
      os << (c.converged ? "true" : "false");
    else if (c.status == "nonconverged")
      os << "false";
    else
      os << c.status;
    os << "\n";
  }
  return os.str();
}

std::string write_residuals_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << "cell_id,iter,relres\n";
  for (const auto& c : report.cells)
    for (std::size_t i = 0; i < c.residual_history.size(); ++i)
      os << c.cell_id << "," << i << "," << fmt_double(c.residual_history[i])
         << "\n";
  return os.str();
}

std::string write_eigs_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << "cell_id,re,im\n";
  for (const auto& c : report.cells)
    for (const auto& ev : c.eigenvalues)
      os << c.cell_id << "," << fmt_double(ev.real()) << ","
         << fmt_double(ev.imag()) << "\n";
  return os.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(field);
      field.clear();
    } else {
      field.push_back(ch);
    }
  }
  out.push_back(field);
  return out;
}

}  // namespace

ExperimentReport parse_csv(const std::string& text) {
  ExperimentReport report;
  std::istringstream is(text);
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 9) throw std::runtime_error("parse_csv: bad row: " + line);
    ExperimentCell c;
    c.problem = f[0];
    c.r = std::stoi(f[1]);
    c.dt = std::strtod(f[2].c_str(), nullptr);
    c.pe = std::strtod(f[3].c_str(), nullptr);
    c.mode = f[4];
    c.outer_iters = std::stoi(f[5]);
    c.mean_inner_iters = std::strtod(f[6].c_str(), nullptr);
    c.ratio = std::strtod(f[7].c_str(), nullptr);
    if (f[8] == "true") {
      c.converged = true;
      c.status = "ok";
    } else if (f[8] == "false") {
      c.converged = false;
      c.status = c.outer_iters == -1 ? "nonconverged" : "ok";
    } else {
      c.converged = false;
      c.status = f[8];
    }
    const int dt_exp = static_cast<int>(std::lround(-std::log2(c.dt)));
    c.cell_id = make_cell_id(c.problem, c.r, dt_exp, c.pe);
    report.cells.push_back(std::move(c));
  }
  return report;
}

void parse_residuals_csv(const std::string& text, ExperimentReport& report) {
  std::istringstream is(text);
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw std::runtime_error("parse_residuals_csv: bad row");
    for (auto& c : report.cells) {
      if (c.cell_id == f[0]) {
        const std::size_t idx = std::stoul(f[1]);
        if (c.residual_history.size() <= idx) c.residual_history.resize(idx + 1);
        c.residual_history[idx] = std::strtod(f[2].c_str(), nullptr);
        break;
      }
    }
  }
}

void parse_eigs_csv(const std::string& text, ExperimentReport& report) {
  std::istringstream is(text);
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw std::runtime_error("parse_eigs_csv: bad row");
    for (auto& c : report.cells) {
      if (c.cell_id == f[0]) {
        c.eigenvalues.emplace_back(std::strtod(f[1].c_str(), nullptr),
                                   std::strtod(f[2].c_str(), nullptr));
        break;
      }
    }
  }
}

std::string write_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["experiment"] = report.experiment;
  j["tol"] = report.tol;
  j["timestamp"] = report.timestamp;
  j["cells"] = nlohmann::json::array();
  for (const auto& c : report.cells) {
    nlohmann::json jc;
    jc["cell_id"] = c.cell_id;
    jc["problem"] = c.problem;
    jc["r"] = c.r;
    jc["dt"] = c.dt;
    jc["pe"] = c.pe;
    jc["mode"] = c.mode;
    jc["outer_iters"] = c.outer_iters;
    if (!std::isnan(c.mean_inner_iters))
      jc["mean_inner_iters"] = c.mean_inner_iters;
    if (!std::isnan(c.ratio)) jc["ratio"] = c.ratio;
    jc["converged"] = c.converged;
    jc["status"] = c.status;
    if (!c.residual_history.empty()) jc["residual_history"] = c.residual_history;
    if (!c.eigenvalues.empty()) {
      auto arr = nlohmann::json::array();
      for (const auto& ev : c.eigenvalues)
        arr.push_back({ev.real(), ev.imag()});
      jc["eigenvalues"] = arr;
    }
    j["cells"].push_back(std::move(jc));
  }
  return j.dump(2);
}

ExperimentReport parse_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ExperimentReport report;
  report.experiment = j.value("experiment", "");
  report.tol = j.value("tol", 0.0);
  report.timestamp = j.value("timestamp", "");
  for (const auto& jc : j.at("cells")) {
    ExperimentCell c;
    c.cell_id = jc.value("cell_id", "");
    c.problem = jc.value("problem", "");
    c.r = jc.value("r", 0);
    c.dt = jc.value("dt", 0.0);
    c.pe = jc.value("pe", 0.0);
    c.mode = jc.value("mode", "");
    c.outer_iters = jc.value("outer_iters", 0);
    c.mean_inner_iters =
        jc.value("mean_inner_iters", std::numeric_limits<double>::quiet_NaN());
    c.ratio = jc.value("ratio", std::numeric_limits<double>::quiet_NaN());
    c.converged = jc.value("converged", false);
    c.status = jc.value("status", "ok");
    if (jc.contains("residual_history"))
      c.residual_history = jc["residual_history"].get<std::vector<double>>();
    if (jc.contains("eigenvalues"))
      for (const auto& p : jc["eigenvalues"])
        c.eigenvalues.emplace_back(p[0].get<double>(), p[1].get<double>());
    report.cells.push_back(std::move(c));
  }
  return report;
}

bool same_cells(const ExperimentReport& a, const ExperimentReport& b) {
  if (a.cells.size() != b.cells.size()) return false;
  auto eq = [](double x, double y) {
    return (std::isnan(x) && std::isnan(y)) || x == y;
  };
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    const auto& ca = a.cells[i];
    const auto& cb = b.cells[i];
    if (ca.cell_id != cb.cell_id || ca.problem != cb.problem || ca.r != cb.r ||
        !eq(ca.dt, cb.dt) || !eq(ca.pe, cb.pe) || ca.mode != cb.mode ||
        ca.outer_iters != cb.outer_iters ||
        !eq(ca.mean_inner_iters, cb.mean_inner_iters) ||
        !eq(ca.ratio, cb.ratio) || ca.converged != cb.converged ||
        ca.status != cb.status ||
        ca.residual_history != cb.residual_history)
      return false;
    if (ca.eigenvalues.size() != cb.eigenvalues.size()) return false;
    for (std::size_t k = 0; k < ca.eigenvalues.size(); ++k)
      if (ca.eigenvalues[k] != cb.eigenvalues[k]) return false;
  }
  return true;
}

}  // namespace stflow
