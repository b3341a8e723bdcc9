#ifndef STFLOW_SPACETIME_HPP
#define STFLOW_SPACETIME_HPP

#include <complex>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "stflow/direct.hpp"
#include "stflow/fem.hpp"
#include "stflow/krylov.hpp"
#include "stflow/problems.hpp"

namespace stflow {

/// Block vector [u^1 ... u^Nt | p^1 ... p^Nt] stored contiguously.
struct SpaceTimeVector {
  int Nt = 0, Nu = 0, Np = 0;
  std::vector<double> data;

  SpaceTimeVector() = default;
  SpaceTimeVector(int nt, int nu, int np)
      : Nt(nt), Nu(nu), Np(np),
        data(static_cast<std::size_t>(nt) * (nu + np), 0.0) {}

  std::span<double> u(int k) {
    return {data.data() + static_cast<std::size_t>(k - 1) * Nu,
            static_cast<std::size_t>(Nu)};
  }
  std::span<const double> u(int k) const {
    return {data.data() + static_cast<std::size_t>(k - 1) * Nu,
            static_cast<std::size_t>(Nu)};
  }
  std::span<double> p(int k) {
    return {data.data() + static_cast<std::size_t>(Nt) * Nu +
                static_cast<std::size_t>(k - 1) * Np,
            static_cast<std::size_t>(Np)};
  }
  std::span<const double> p(int k) const {
    return {data.data() + static_cast<std::size_t>(Nt) * Nu +
                static_cast<std::size_t>(k - 1) * Np,
            static_cast<std::size_t>(Np)};
  }
  std::span<double> u_all() {
    return {data.data(), static_cast<std::size_t>(Nt) * Nu};
  }
  std::span<const double> u_all() const {
    return {data.data(), static_cast<std::size_t>(Nt) * Nu};
  }
  std::span<double> p_all() {
    return {data.data() + static_cast<std::size_t>(Nt) * Nu,
            static_cast<std::size_t>(Nt) * Np};
  }
  std::span<const double> p_all() const {
    return {data.data() + static_cast<std::size_t>(Nt) * Nu,
            static_cast<std::size_t>(Nt) * Np};
  }
  std::size_t size() const { return data.size(); }
};

/// Spatial objects that stay fixed while the wind (and hence the advection
/// blocks) changes, e.g. across Picard iterations.
struct SpatialDiscretisation {
  FESpaces spaces;
  VelocityDirichlet bc;
  SparseMatrix Mu, Au, B;  // raw Galerkin operators
  SparseMatrix Mp, Ap_tilde;
};

SpatialDiscretisation discretise(const ProblemSpec& problem, int r);

/// Wind evaluator per time step (t = k*dt); used to override the problem's
/// analytic wind, e.g. with the previous Picard iterate.
using WindProvider =
    std::function<std::shared_ptr<const WindEvaluator>(int k, double t)>;

/// The monolithic implicit-Euler system in the variable-major ordering,
/// with velocity Dirichlet dofs kept as identity rows and their couplings
/// moved to the right-hand side.
struct SpaceTimeSystem {
  int Nt = 0;
  double dt = 0.0;
  double mu = 1.0;
  int Nu = 0, Np = 0;
  bool enclosed = false;  // pressure laplacian singular (constant kernel)
  bool stokes = true;     // no advection blocks anywhere

  std::vector<SparseMatrix> Fu;  // unique velocity blocks
  std::vector<int> fu_of_k;      // step k -> index into Fu
  std::vector<SparseMatrix> Fp;  // unique pressure blocks Mp/dt + Wp + mu*Ap
  std::vector<int> fp_of_k;
  SparseMatrix Msub;     // Mu/dt with constrained rows/cols zeroed
  SparseMatrix B, Bt;    // divergence with constrained cols zeroed
  SparseMatrix Mp, Ap;   // pressure mass / laplacian (outflow rows eliminated)
  SpaceTimeVector rhs;
  std::vector<std::vector<double>> dirichlet_values;  // per step, length Nu

  SpatialDiscretisation disc;  // spaces, bc and raw operators (for checks)

  const SparseMatrix& fu(int k) const { return Fu[fu_of_k[k - 1]]; }
  const SparseMatrix& fp(int k) const { return Fp[fp_of_k[k - 1]]; }
  SpaceTimeVector zero_vector() const { return {Nt, Nu, Np}; }
  /// Null guess apart from the Dirichlet values.
  SpaceTimeVector initial_guess() const;
};

SpaceTimeSystem assemble_system(const ProblemSpec& problem,
                                const SpatialDiscretisation& disc, int dt_exp,
                                const WindProvider* wind_override = nullptr);
SpaceTimeSystem assemble_system(const ProblemSpec& problem, int r, int dt_exp);

/// y = A x for the reordered monolithic operator.
void apply_spacetime_operator(const SpaceTimeSystem& sys,
                              const SpaceTimeVector& x, SpaceTimeVector& y);
SpaceTimeVector apply_spacetime_operator(const SpaceTimeSystem& sys,
                                         const SpaceTimeVector& x);

/// rhs - A x and its Euclidean norm relative to ||rhs||.
SpaceTimeVector residual(const SpaceTimeSystem& sys, const SpaceTimeVector& x);
double relative_residual(const SpaceTimeSystem& sys, const SpaceTimeVector& x);

struct PrecondConfig {
  enum class Velocity { ExactTimeStepLU, InnerKrylov };
  enum class Mass { LU, Chebyshev };
  enum class Laplacian { LU, CG };
  enum class Schur { General, StokesSimplified };

  Velocity velocity = Velocity::ExactTimeStepLU;
  double inner_tol = 1e-3;
  int inner_max_iter = 200;
  Mass mass = Mass::LU;
  int chebyshev_iterations = 8;
  Laplacian laplacian = Laplacian::CG;
  double cg_tol = 1e-8;
  int cg_max_iter = 2000;
  Schur schur = Schur::General;

  bool any_iterative() const {
    return velocity == Velocity::InnerKrylov || mass == Mass::Chebyshev ||
           laplacian == Laplacian::CG;
  }
  /// Exact solvers everywhere (best-case setup).
  static PrecondConfig ideal();
  /// Chebyshev mass solve, CG laplacian solve, inner Krylov velocity solve.
  static PrecondConfig approximate();
};

/// Block upper triangular right preconditioner: the velocity block is
/// time-integrated, the pressure Schur complement is approximated by
/// X^{-1} = Mp^{-1} Fp Ap^{-1} with independent spatial solves per step.
class PTPreconditioner {
public:
  PTPreconditioner(const SpaceTimeSystem& sys, PrecondConfig cfg);

  void apply(const SpaceTimeVector& r, SpaceTimeVector& out) const;
  SpaceTimeVector apply(const SpaceTimeVector& r) const;

  /// X^{-1} applied to the stacked pressure blocks (Nt*Np values).
  std::vector<double> apply_schur_inverse(std::span<const double> rp) const;
  /// F_u^{-1} applied to the stacked velocity blocks (Nt*Nu values).
  std::vector<double> solve_velocity_block(std::span<const double> ru) const;
  /// Iterations used by the last inner velocity solve (InnerKrylov only).
  int last_inner_iterations() const { return last_inner_iters_; }

  void solve_mass(std::span<const double> b, std::span<double> x) const;
  /// Deflates the constant mode for enclosed flow.
  void solve_laplacian(std::span<const double> b, std::span<double> x) const;
  const SparseFactorization& fu_factor(int k) const;

  const PrecondConfig& config() const { return cfg_; }

private:
  const SpaceTimeSystem& sys_;
  PrecondConfig cfg_;
  std::vector<SparseFactorization> fu_lu_;  // per unique Fu block
  std::optional<SparseFactorization> mp_lu_;
  std::optional<SparseFactorization> ap_lu_;  // pinned when enclosed
  mutable int last_inner_iters_ = 0;
};

struct AllAtOnceResult {
  SpaceTimeVector x;
  SolveReport report;
};

/// FGMRES (when any component solver is iterative, plain GMRES otherwise)
/// on the monolithic system, right-preconditioned with P_T^{-1}.
AllAtOnceResult solve_all_at_once(const SpaceTimeSystem& sys,
                                  const PrecondConfig& pc,
                                  const KrylovConfig& kc);

struct TimeSteppingResult {
  SpaceTimeVector x;
  std::vector<int> step_iterations;
  double mean_iterations = 0.0;
  bool converged = false;
};

/// Block forward substitution: each step solved by GMRES preconditioned
/// with the single-step counterpart of P_T, warm-started from the previous
/// step, at tolerance tol/sqrt(Nt).
TimeSteppingResult sequential_time_stepping(const SpaceTimeSystem& sys,
                                            const PrecondConfig& pc, double tol,
                                            int max_iter_per_step = 400);

/// Eigenvalues of Mp^{-1} Fp_k Ap^{-1} B Fu_k^{-1} B^T, formed densely by
/// Np sparse solves. The constant-mode eigenvalue of enclosed flow is
/// deflated and excluded.
std::vector<std::complex<double>> preconditioned_schur_eigs(
    const SpaceTimeSystem& sys, int k);

}  // namespace stflow

#endif  // STFLOW_SPACETIME_HPP
