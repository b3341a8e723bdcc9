#include "stflow/direct.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace stflow {

namespace {

Eigen::SparseMatrix<double> to_eigen(const SparseMatrix& A) {
  if (A.rows() != A.cols())
    throw std::invalid_argument("sparse_lu: matrix must be square");
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(A.nnz());
  for (int r = 0; r < A.rows(); ++r)
    for (int k = A.row_offsets()[r]; k < A.row_offsets()[r + 1]; ++k)
      trip.emplace_back(r, A.col_indices()[k], A.values()[k]);
  Eigen::SparseMatrix<double> E(A.rows(), A.cols());
  E.setFromTriplets(trip.begin(), trip.end());
  E.makeCompressed();
  return E;
}

}  // namespace

struct SparseFactorization::Impl {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
};

SparseFactorization::SparseFactorization(const SparseMatrix& A)
    : impl_(std::make_unique<Impl>()), n_(A.rows()) {
  refactorize(A);
}

SparseFactorization::~SparseFactorization() = default;
SparseFactorization::SparseFactorization(SparseFactorization&&) noexcept = default;
SparseFactorization& SparseFactorization::operator=(SparseFactorization&&) noexcept =
    default;

void SparseFactorization::refactorize(const SparseMatrix& A) {
  if (A.rows() != n_) throw std::invalid_argument("refactorize: size changed");
  const Eigen::SparseMatrix<double> E = to_eigen(A);
  if (!impl_->analyzed) {
    impl_->lu.analyzePattern(E);
    impl_->analyzed = true;
  }
  impl_->lu.factorize(E);
  if (impl_->lu.info() != Eigen::Success)
    throw SingularMatrixError("sparse_lu: zero pivot, matrix is singular");
}

std::vector<double> SparseFactorization::solve(std::span<const double> b) const {
  std::vector<double> x(b.size());
  solve(b, x);
  return x;
}

void SparseFactorization::solve(std::span<const double> b,
                                std::span<double> x) const {
  Eigen::Map<const Eigen::VectorXd> bm(b.data(), static_cast<Eigen::Index>(b.size()));
  Eigen::Map<Eigen::VectorXd> xm(x.data(), static_cast<Eigen::Index>(x.size()));
  xm = impl_->lu.solve(bm);
}

}  // namespace stflow
