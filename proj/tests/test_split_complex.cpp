#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <complex>
#include <vector>

#include "udnn/errors.hpp"
#include "udnn/rng.hpp"
#include "udnn/split_complex.hpp"

using namespace udnn;
using Cx = std::complex<double>;

namespace {

SplitComplexMatrix random_matrix(Rng& rng, int rows, int cols) {
  SplitComplexMatrix a = SplitComplexMatrix::zero(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      a.set(i, j, {rng.gaussian(), rng.gaussian()});
  return a;
}

SplitComplexVector random_vector(Rng& rng, int n) {
  SplitComplexVector v = SplitComplexVector::zero(n);
  for (int i = 0; i < n; ++i) v.set(i, {rng.gaussian(), rng.gaussian()});
  return v;
}

// scalar-loop complex oracle, independent of the split-block implementation
std::vector<Cx> oracle_mat_vec(const SplitComplexMatrix& a,
                               const SplitComplexVector& v) {
  std::vector<Cx> w(a.rows(), Cx(0, 0));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) w[i] += a.at(i, j) * v.at(j);
  return w;
}

}  // namespace

TEST_CASE("cmul_mat_vec identity and imaginary unit") {
  SplitComplexMatrix eye = SplitComplexMatrix::identity(1);
  SplitComplexVector v = SplitComplexVector::zero(1);
  v.set(0, {3.0, 4.0});
  SplitComplexVector w = cmul_mat_vec(eye, v);
  CHECK(w.at(0) == Cx(3.0, 4.0));

  SplitComplexMatrix unit_i = SplitComplexMatrix::zero(1, 1);
  unit_i.set(0, 0, {0.0, 1.0});
  SplitComplexVector one = SplitComplexVector::zero(1);
  one.set(0, {1.0, 0.0});
  CHECK(cmul_mat_vec(unit_i, one).at(0) == Cx(0.0, 1.0));
}

TEST_CASE("cmul_mat_vec matches scalar complex oracle") {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    SplitComplexMatrix a = random_matrix(rng, 4, 4);
    SplitComplexVector v = random_vector(rng, 4);
    SplitComplexVector got = cmul_mat_vec(a, v);
    std::vector<Cx> want = oracle_mat_vec(a, v);
    for (int i = 0; i < 4; ++i)
      CHECK(std::abs(got.at(i) - want[i]) <=
            1e-13 * std::max(1.0, std::abs(want[i])));
  }
}

TEST_CASE("cmul_mat_vec rejects dimension mismatch") {
  SplitComplexMatrix a = SplitComplexMatrix::zero(2, 3);
  SplitComplexVector v = SplitComplexVector::zero(2);
  CHECK_THROWS_AS(cmul_mat_vec(a, v), ShapeError);
}

TEST_CASE("cmul_mat_mat matches scalar oracle") {
  Rng rng(7);
  SplitComplexMatrix a = random_matrix(rng, 3, 5);
  SplitComplexMatrix b = random_matrix(rng, 5, 4);
  SplitComplexMatrix c = cmul_mat_mat(a, b);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) {
      Cx want(0, 0);
      for (int k = 0; k < 5; ++k) want += a.at(i, k) * b.at(k, j);
      CHECK(std::abs(c.at(i, j) - want) <= 1e-13 * std::max(1.0, std::abs(want)));
    }
}

TEST_CASE("hermitian basics") {
  // real symmetric fixed point
  SplitComplexMatrix sym = SplitComplexMatrix::zero(2, 2);
  sym.re << 1.0, 2.0, 2.0, 5.0;
  SplitComplexMatrix h = hermitian(sym);
  CHECK((h.re - sym.re).cwiseAbs().maxCoeff() == 0.0);
  CHECK(h.im.cwiseAbs().maxCoeff() == 0.0);

  // scalar conjugate
  SplitComplexMatrix s = SplitComplexMatrix::zero(1, 1);
  s.set(0, 0, {2.0, 3.0});
  CHECK(hermitian(s).at(0, 0) == Cx(2.0, -3.0));
}

TEST_CASE("hermitian is an involution") {
  Rng rng(3);
  SplitComplexMatrix a = random_matrix(rng, 6, 4);
  SplitComplexMatrix b = hermitian(hermitian(a));
  CHECK((b.re - a.re).cwiseAbs().maxCoeff() == 0.0);
  CHECK((b.im - a.im).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("largest_eigenvalue_gram on spectra known in closed form") {
  SplitComplexMatrix eye = SplitComplexMatrix::identity(5);
  CHECK(largest_eigenvalue_gram(eye) == doctest::Approx(1.0).epsilon(1e-9));

  SplitComplexMatrix diag = SplitComplexMatrix::zero(2, 2);
  diag.re(0, 0) = 3.0;
  diag.re(1, 1) = 1.0;
  CHECK(largest_eigenvalue_gram(diag) == doctest::Approx(9.0).epsilon(1e-9));
}

TEST_CASE("largest_eigenvalue_gram matches dense Hermitian eigensolver") {
  Rng rng(11);
  SplitComplexMatrix a = random_matrix(rng, 16, 36);
  const double via_power = largest_eigenvalue_gram(a, 1e-12, 20000);

  // oracle: dense eigendecomposition of the 36x36 Gram matrix
  Eigen::MatrixXcd ac(16, 36);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 36; ++j) ac(i, j) = a.at(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ac.adjoint() * ac);
  const double want = es.eigenvalues().maxCoeff();
  CHECK(via_power == doctest::Approx(want).epsilon(1e-8));
}

TEST_CASE("largest_eigenvalue_gram domain errors") {
  SplitComplexMatrix zero = SplitComplexMatrix::zero(2, 2);
  CHECK_THROWS_AS(largest_eigenvalue_gram(zero), DomainError);
  SplitComplexMatrix eye = SplitComplexMatrix::identity(2);
  CHECK_THROWS_AS(largest_eigenvalue_gram(eye, -1.0), DomainError);
}

TEST_CASE("power iteration upper-bounds Rayleigh quotients of probes") {
  Rng rng(13);
  SplitComplexMatrix a = random_matrix(rng, 8, 12);
  const double l = largest_eigenvalue_gram(a, 1e-12, 20000);
  for (int trial = 0; trial < 20; ++trial) {
    SplitComplexVector u = random_vector(rng, 12);
    SplitComplexVector au = cmul_mat_vec(a, u);
    const double q = (norm2(au) * norm2(au)) / (norm2(u) * norm2(u));
    CHECK(q <= l * (1.0 + 1e-8));
    CHECK(norm2(au) <= std::sqrt(l) * norm2(u) * (1.0 + 1e-8));
  }
}

TEST_CASE("cvec_axpby identities and oracle") {
  Rng rng(5);
  SplitComplexVector x = random_vector(rng, 6);
  SplitComplexVector y = random_vector(rng, 6);

  SplitComplexVector gx = cvec_axpby({1, 0}, x, {0, 0}, y);
  SplitComplexVector gy = cvec_axpby({0, 0}, x, {1, 0}, y);
  for (int i = 0; i < 6; ++i) {
    CHECK(gx.at(i) == x.at(i));
    CHECK(gy.at(i) == y.at(i));
  }

  Cx alpha(rng.gaussian(), rng.gaussian());
  Cx beta(rng.gaussian(), rng.gaussian());
  SplitComplexVector got = cvec_axpby(alpha, x, beta, y);
  for (int i = 0; i < 6; ++i) {
    const Cx want = alpha * x.at(i) + beta * y.at(i);
    CHECK(std::abs(got.at(i) - want) <= 1e-13 * std::max(1.0, std::abs(want)));
  }

  SplitComplexVector short_v = SplitComplexVector::zero(3);
  CHECK_THROWS_AS(cvec_axpby({1, 0}, x, {1, 0}, short_v), ShapeError);
}

TEST_CASE("norm2") {
  CHECK(norm2(SplitComplexVector::zero(4)) == 0.0);

  SplitComplexVector v = SplitComplexVector::zero(1);
  v.set(0, {3.0, 4.0});
  CHECK(norm2(v) == doctest::Approx(5.0).epsilon(1e-15));

  Rng rng(17);
  SplitComplexVector w = random_vector(rng, 32);
  double want = 0.0;
  for (int i = 0; i < 32; ++i) want += std::norm(w.at(i));
  CHECK(norm2(w) == doctest::Approx(std::sqrt(want)).epsilon(1e-13));
}

TEST_CASE("all operations keep entries finite") {
  Rng rng(23);
  SplitComplexMatrix a = random_matrix(rng, 5, 5);
  SplitComplexVector v = random_vector(rng, 5);
  CHECK(cmul_mat_vec(a, v).all_finite());
  CHECK(hermitian(a).all_finite());
  CHECK(cvec_axpby({0.5, -2}, v, {3, 1}, v).all_finite());
}
