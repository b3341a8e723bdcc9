#include "stflow/eig.hpp"

#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace stflow {

std::vector<std::complex<double>> dense_eigenvalues(const std::vector<double>& a,
                                                    int n) {
  if (static_cast<std::size_t>(n) * n != a.size())
    throw std::invalid_argument("dense_eigenvalues: size mismatch");
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = a[static_cast<std::size_t>(i) * n + j];
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("dense_eigenvalues: QR iteration did not converge");
  std::vector<std::complex<double>> out(n);
  for (int i = 0; i < n; ++i) out[i] = es.eigenvalues()[i];
  return out;
}

std::vector<std::complex<double>> dense_eigenvalues(
    const std::vector<std::vector<double>>& a) {
  const int n = static_cast<int>(a.size());
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(n) * n);
  for (const auto& row : a) {
    if (static_cast<int>(row.size()) != n)
      throw std::invalid_argument("dense_eigenvalues: matrix not square");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return dense_eigenvalues(flat, n);
}

}  // namespace stflow
