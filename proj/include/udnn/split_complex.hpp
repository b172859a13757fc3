#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

namespace udnn {

using RealVector = Eigen::VectorXd;
using RealMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Complex vector stored as separate real and imaginary parts. This is the
// native representation of the whole pipeline: every complex quantity is kept
// split so the network layers can operate on real numbers only.
struct SplitComplexVector {
  RealVector re;
  RealVector im;

  SplitComplexVector() = default;
  SplitComplexVector(RealVector r, RealVector i);

  static SplitComplexVector zero(Eigen::Index n) {
    return {RealVector::Zero(n), RealVector::Zero(n)};
  }

  Eigen::Index size() const { return re.size(); }

  std::complex<double> at(Eigen::Index i) const { return {re[i], im[i]}; }
  void set(Eigen::Index i, std::complex<double> v) {
    re[i] = v.real();
    im[i] = v.imag();
  }

  bool all_finite() const {
    return re.allFinite() && im.allFinite();
  }
};

// Complex matrix in split form; houses A, Phi, W1, W2 and friends.
struct SplitComplexMatrix {
  RealMatrix re;
  RealMatrix im;

  SplitComplexMatrix() = default;
  SplitComplexMatrix(RealMatrix r, RealMatrix i);

  static SplitComplexMatrix zero(Eigen::Index rows, Eigen::Index cols) {
    return {RealMatrix::Zero(rows, cols), RealMatrix::Zero(rows, cols)};
  }
  static SplitComplexMatrix identity(Eigen::Index n) {
    return {RealMatrix::Identity(n, n), RealMatrix::Zero(n, n)};
  }

  Eigen::Index rows() const { return re.rows(); }
  Eigen::Index cols() const { return re.cols(); }

  std::complex<double> at(Eigen::Index i, Eigen::Index j) const {
    return {re(i, j), im(i, j)};
  }
  void set(Eigen::Index i, Eigen::Index j, std::complex<double> v) {
    re(i, j) = v.real();
    im(i, j) = v.imag();
  }

  bool all_finite() const {
    return re.allFinite() && im.allFinite();
  }
};

// w = A v under complex arithmetic:
//   w.re = A.re v.re - A.im v.im,  w.im = A.re v.im + A.im v.re
SplitComplexVector cmul_mat_vec(const SplitComplexMatrix& a,
                                const SplitComplexVector& v);

// C = A B under complex arithmetic.
SplitComplexMatrix cmul_mat_mat(const SplitComplexMatrix& a,
                                const SplitComplexMatrix& b);

// Conjugate transpose.
SplitComplexMatrix hermitian(const SplitComplexMatrix& a);

// alpha x + beta y under complex arithmetic.
SplitComplexVector cvec_axpby(std::complex<double> alpha,
                              const SplitComplexVector& x,
                              std::complex<double> beta,
                              const SplitComplexVector& y);

// Euclidean norm sqrt(sum re^2 + im^2).
double norm2(const SplitComplexVector& x);

// Largest eigenvalue of the Hermitian Gram matrix A^H A, by power iteration
// on v -> A^H (A v). This is the Lipschitz constant of the gradient of
// (1/2)||y - A x||^2 and sets the ISTA step size. Terminates when the
// relative change between successive Rayleigh quotients drops below tol;
// throws ConvergenceError (carrying the last iterate) past max_iter.
// The start vector is pseudo-random from a fixed seed, so the result is
// reproducible.
double largest_eigenvalue_gram(const SplitComplexMatrix& a, double tol = 1e-10,
                               int max_iter = 5000);

}  // namespace udnn
