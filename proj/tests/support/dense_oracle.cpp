#include "dense_oracle.hpp"

namespace stflow::test {

Eigen::MatrixXd to_dense(const SparseMatrix& A) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(A.rows(), A.cols());
  for (int r = 0; r < A.rows(); ++r)
    for (int k = A.row_offsets()[r]; k < A.row_offsets()[r + 1]; ++k)
      D(r, A.col_indices()[k]) = A.values()[k];
  return D;
}

Eigen::MatrixXd dense_spacetime_matrix(const SpaceTimeSystem& sys) {
  const int Nt = sys.Nt, Nu = sys.Nu, Np = sys.Np;
  const int n = Nt * (Nu + Np);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  const Eigen::MatrixXd Msub = to_dense(sys.Msub);
  const Eigen::MatrixXd B = to_dense(sys.B);
  for (int k = 1; k <= Nt; ++k) {
    const int ui = (k - 1) * Nu;
    const int pi = Nt * Nu + (k - 1) * Np;
    A.block(ui, ui, Nu, Nu) = to_dense(sys.fu(k));
    if (k > 1) A.block(ui, ui - Nu, Nu, Nu) = -Msub;
    A.block(ui, pi, Nu, Np) = B.transpose();
    A.block(pi, ui, Np, Nu) = B;
  }
  return A;
}

Eigen::MatrixXd dense_schur_approximation(const SpaceTimeSystem& sys) {
  const int Nt = sys.Nt, Np = sys.Np;
  Eigen::MatrixXd Fp = Eigen::MatrixXd::Zero(Nt * Np, Nt * Np);
  Eigen::MatrixXd Ap = Eigen::MatrixXd::Zero(Nt * Np, Nt * Np);
  Eigen::MatrixXd Mp = Eigen::MatrixXd::Zero(Nt * Np, Nt * Np);
  const Eigen::MatrixXd Mp1 = to_dense(sys.Mp);
  const Eigen::MatrixXd Ap1 = to_dense(sys.Ap);
  for (int k = 1; k <= Nt; ++k) {
    const int i = (k - 1) * Np;
    Fp.block(i, i, Np, Np) = to_dense(sys.fp(k));
    if (k > 1) Fp.block(i, i - Np, Np, Np) = -Mp1 / sys.dt;
    Ap.block(i, i, Np, Np) = Ap1;
    Mp.block(i, i, Np, Np) = Mp1;
  }
  return Ap * Fp.inverse() * Mp;
}

Eigen::MatrixXd dense_exact_schur(const SpaceTimeSystem& sys) {
  const int Nt = sys.Nt, Nu = sys.Nu, Np = sys.Np;
  Eigen::MatrixXd Fu = Eigen::MatrixXd::Zero(Nt * Nu, Nt * Nu);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(Nt * Np, Nt * Nu);
  const Eigen::MatrixXd Msub = to_dense(sys.Msub);
  const Eigen::MatrixXd B1 = to_dense(sys.B);
  for (int k = 1; k <= Nt; ++k) {
    const int ui = (k - 1) * Nu;
    Fu.block(ui, ui, Nu, Nu) = to_dense(sys.fu(k));
    if (k > 1) Fu.block(ui, ui - Nu, Nu, Nu) = -Msub;
    B.block((k - 1) * Np, ui, Np, Nu) = B1;
  }
  return B * Fu.partialPivLu().solve(B.transpose());
}

ExactSchurPreconditioner::ExactSchurPreconditioner(const SpaceTimeSystem& sys)
    : sys_(sys), velocity_(sys, PrecondConfig::ideal()) {
  schur_.compute(dense_exact_schur(sys));
}

SpaceTimeVector ExactSchurPreconditioner::apply(const SpaceTimeVector& r) const {
  const int Nt = sys_.Nt, Nu = sys_.Nu, Np = sys_.Np;
  Eigen::VectorXd rp(Nt * Np);
  for (int i = 0; i < Nt * Np; ++i) rp[i] = r.p_all()[i];
  const Eigen::VectorXd zp = -schur_.solve(rp);

  std::vector<double> t(static_cast<std::size_t>(Nt) * Nu);
  for (int k = 1; k <= Nt; ++k) {
    auto tk =
        std::span<double>(t.data() + static_cast<std::size_t>(k - 1) * Nu, Nu);
    std::copy(r.u(k).begin(), r.u(k).end(), tk.begin());
    std::vector<double> zpk(Np);
    for (int i = 0; i < Np; ++i) zpk[i] = zp[(k - 1) * Np + i];
    sys_.Bt.mult_add(zpk, tk, -1.0);
  }
  const std::vector<double> zu = velocity_.solve_velocity_block(t);

  SpaceTimeVector out = sys_.zero_vector();
  std::copy(zu.begin(), zu.end(), out.u_all().begin());
  for (int i = 0; i < Nt * Np; ++i) out.p_all()[i] = zp[i];
  return out;
}

LinearOperator ExactSchurPreconditioner::as_linear_operator() const {
  return [this](std::span<const double> x, std::span<double> y) {
    SpaceTimeVector xv = sys_.zero_vector();
    std::copy(x.begin(), x.end(), xv.data.begin());
    const SpaceTimeVector yv = apply(xv);
    std::copy(yv.data.begin(), yv.data.end(), y.begin());
  };
}

}  // namespace stflow::test
