#pragma once

// Thin helpers over Eigen used across the library.

#include <Eigen/Dense>

#include <complex>

namespace smallgain {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Largest singular value of a real matrix (0 for an empty matrix).
double sigma_max(const Mat& m);

/// Largest singular value of a complex matrix.
double sigma_max(const CMat& m);

/// Extreme eigenvalues of a real symmetric matrix.
double lambda_max_sym(const Mat& m);
double lambda_min_sym(const Mat& m);

/// Largest absolute asymmetry |m(i,j) - m(j,i)|.
double asymmetry(const Mat& m);

/// Kronecker product a ⊗ b.
CMat kron(const CMat& a, const CMat& b);

/// Largest |m - m†| entry.
double hermitian_defect(const CMat& m);

}  // namespace smallgain
