#include "udnn/split_complex.hpp"

#include <cmath>

#include "udnn/errors.hpp"
#include "udnn/rng.hpp"

namespace udnn {

SplitComplexVector::SplitComplexVector(RealVector r, RealVector i)
    : re(std::move(r)), im(std::move(i)) {
  if (re.size() != im.size())
    throw ShapeError("SplitComplexVector: re/im length mismatch");
}

SplitComplexMatrix::SplitComplexMatrix(RealMatrix r, RealMatrix i)
    : re(std::move(r)), im(std::move(i)) {
  if (re.rows() != im.rows() || re.cols() != im.cols())
    throw ShapeError("SplitComplexMatrix: re/im shape mismatch");
}

SplitComplexVector cmul_mat_vec(const SplitComplexMatrix& a,
                                const SplitComplexVector& v) {
  if (a.cols() != v.size())
    throw ShapeError("cmul_mat_vec: A.cols != v.length");
  SplitComplexVector w;
  w.re.noalias() = a.re * v.re;
  w.re.noalias() -= a.im * v.im;
  w.im.noalias() = a.re * v.im;
  w.im.noalias() += a.im * v.re;
  return w;
}

SplitComplexMatrix cmul_mat_mat(const SplitComplexMatrix& a,
                                const SplitComplexMatrix& b) {
  if (a.cols() != b.rows())
    throw ShapeError("cmul_mat_mat: inner dimensions mismatch");
  SplitComplexMatrix c;
  c.re.noalias() = a.re * b.re;
  c.re.noalias() -= a.im * b.im;
  c.im.noalias() = a.re * b.im;
  c.im.noalias() += a.im * b.re;
  return c;
}

SplitComplexMatrix hermitian(const SplitComplexMatrix& a) {
  SplitComplexMatrix b;
  b.re = a.re.transpose();
  b.im = -a.im.transpose();
  return b;
}

SplitComplexVector cvec_axpby(std::complex<double> alpha,
                              const SplitComplexVector& x,
                              std::complex<double> beta,
                              const SplitComplexVector& y) {
  if (x.size() != y.size()) throw ShapeError("cvec_axpby: length mismatch");
  SplitComplexVector w;
  w.re = alpha.real() * x.re - alpha.imag() * x.im + beta.real() * y.re -
         beta.imag() * y.im;
  w.im = alpha.real() * x.im + alpha.imag() * x.re + beta.real() * y.im +
         beta.imag() * y.re;
  return w;
}

double norm2(const SplitComplexVector& x) {
  return std::sqrt(x.re.squaredNorm() + x.im.squaredNorm());
}

double largest_eigenvalue_gram(const SplitComplexMatrix& a, double tol,
                               int max_iter) {
  if (tol <= 0) throw DomainError("largest_eigenvalue_gram: tol must be > 0");
  if (max_iter < 1)
    throw DomainError("largest_eigenvalue_gram: max_iter must be >= 1");
  if (a.re.isZero(0.0) && a.im.isZero(0.0))
    throw DomainError("largest_eigenvalue_gram: A is zero");

  const SplitComplexMatrix ah = hermitian(a);

  // Fixed-seed start vector keeps L (and every downstream rho, theta)
  // reproducible.
  Rng rng(0x9d5a1c2bull);
  SplitComplexVector v = SplitComplexVector::zero(a.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v.re[i] = rng.gaussian();
    v.im[i] = rng.gaussian();
  }
  double vn = norm2(v);
  v.re /= vn;
  v.im /= vn;

  double lambda_prev = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    SplitComplexVector w = cmul_mat_vec(ah, cmul_mat_vec(a, v));
    // Rayleigh quotient Re(v^H w); v has unit norm.
    double lambda = v.re.dot(w.re) + v.im.dot(w.im);
    double wn = norm2(w);
    if (wn == 0.0) {
      // v landed in the null space of the Gram operator; restart once from a
      // different deterministic vector.
      Rng rng2(0x51ed270b ^ static_cast<std::uint64_t>(it + 1));
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        v.re[i] = rng2.gaussian();
        v.im[i] = rng2.gaussian();
      }
      vn = norm2(v);
      v.re /= vn;
      v.im /= vn;
      lambda_prev = 0.0;
      continue;
    }
    v.re = w.re / wn;
    v.im = w.im / wn;
    if (it > 0 &&
        std::abs(lambda - lambda_prev) < tol * std::max(std::abs(lambda), 1e-300))
      return lambda;
    lambda_prev = lambda;
  }
  throw ConvergenceError("largest_eigenvalue_gram: no convergence", lambda_prev);
}

}  // namespace udnn
