#ifndef STFLOW_EIG_HPP
#define STFLOW_EIG_HPP

#include <complex>
#include <vector>

namespace stflow {

/// Eigenvalues of a dense real square matrix (row-major, n*n entries) via
/// Hessenberg reduction and the shifted QR iteration. Intended for
/// desk-scale matrices (n up to a few thousand).
std::vector<std::complex<double>> dense_eigenvalues(
    const std::vector<double>& a, int n);

std::vector<std::complex<double>> dense_eigenvalues(
    const std::vector<std::vector<double>>& a);

}  // namespace stflow

#endif  // STFLOW_EIG_HPP
