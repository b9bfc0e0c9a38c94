#include "doctest.h"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "apq/fit.hpp"
#include "apq/linalg.hpp"
#include "apq/parallel.hpp"
#include "apq/rng.hpp"

using namespace apq;

namespace {

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

// Index-loop Kronecker product, independent of the library implementation.
Matrix kron_bruteforce(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index ia = 0; ia < a.rows(); ++ia)
    for (Eigen::Index ja = 0; ja < a.cols(); ++ja)
      for (Eigen::Index ib = 0; ib < b.rows(); ++ib)
        for (Eigen::Index jb = 0; jb < b.cols(); ++jb)
          out(ia * b.rows() + ib, ja * b.cols() + jb) = a(ia, ja) * b(ib, jb);
  return out;
}

} // namespace

TEST_CASE("vec stacks columns") {
  Matrix m(2, 2);
  m << 1, 3, 2, 4;  // columns (1,2) and (3,4)
  Vector v = vec(m);
  CHECK(v(0) == Complex(1));
  CHECK(v(1) == Complex(2));
  CHECK(v(2) == Complex(3));
  CHECK(v(3) == Complex(4));
  CHECK((unvec(v, 2) - m).norm() == 0.0);
}

TEST_CASE("vec(AXB) = (B^T kron A) vec(X)") {
  CounterRng rng{11, 0};
  Matrix a = rng.gaussian_matrix(3, 3, 0);
  Matrix x = rng.gaussian_matrix(3, 3, 1);
  Matrix b = rng.gaussian_matrix(3, 3, 2);
  Vector lhs = vec((a * x * b).eval());
  Vector rhs = kron(b.transpose(), a) * vec(x);
  CHECK((lhs - rhs).norm() < 1e-12 * lhs.norm());
}

TEST_CASE("kron matches frozen sigma_x kron sigma_z and brute force") {
  Matrix k = kron(pauli_x(), pauli_z());
  Matrix expect(4, 4);
  expect << 0, 0, 1, 0,
            0, 0, 0, -1,
            1, 0, 0, 0,
            0, -1, 0, 0;
  CHECK((k - expect).norm() == 0.0);

  CounterRng rng{3, 9};
  Matrix a = rng.gaussian_matrix(2, 3, 0);
  Matrix b = rng.gaussian_matrix(3, 2, 1);
  CHECK((kron(a, b) - kron_bruteforce(a, b)).norm() < 1e-14);
}

TEST_CASE("superoperator apply uses column-stacking convention") {
  CounterRng rng{21, 4};
  Matrix a = rng.gaussian_matrix(2, 2, 0);
  Matrix b = rng.gaussian_matrix(2, 2, 1);
  Matrix x = rng.gaussian_matrix(2, 2, 2);
  Superoperator s(2, kron(b.transpose(), a));
  CHECK((s.apply(x) - a * x * b).norm() < 1e-13);
}

TEST_CASE("expm on diagonal, nilpotent and unitary-generator inputs") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = Complex(0.3, 0.0);
  d(1, 1) = Complex(-1.2, 0.5);
  Matrix e = expm(d);
  CHECK(std::abs(e(0, 0) - std::exp(Complex(0.3, 0.0))) < 1e-14);
  CHECK(std::abs(e(1, 1) - std::exp(Complex(-1.2, 0.5))) < 1e-14);
  CHECK(std::abs(e(0, 1)) == 0.0);

  Matrix n(2, 2);
  n << 0, 1, 0, 0;  // nilpotent: exp = I + N
  Matrix en = expm(n);
  CHECK(std::abs(en(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(en(0, 1) - 1.0) < 1e-15);
  CHECK(std::abs(en(1, 0)) < 1e-15);

  // exp(-i theta sigma_x) = cos(theta) I - i sin(theta) sigma_x
  const double theta = 0.7;
  Matrix u = expm((-I_UNIT * theta * pauli_x()).eval());
  Matrix expect = std::cos(theta) * Matrix::Identity(2, 2) - I_UNIT * std::sin(theta) * pauli_x();
  CHECK((u - expect).norm() < 1e-14);
}

TEST_CASE("expm series and Pade branches agree across the switchover") {
  CounterRng rng{77, 1};
  Matrix m = rng.gaussian_matrix(4, 4, 0);
  m /= one_norm(m);  // one_norm(m) == 1 now
  // 0.49: series branch; 0.51: Pade branch; compare both against squaring.
  Matrix small = expm(m, 0.49);
  Matrix big = expm(m, 0.98);
  CHECK((small * small - big).norm() < 1e-12 * big.norm());
  Matrix viaPade = (0.49 * m).eval().exp();
  CHECK((small - viaPade).norm() < 1e-13 * viaPade.norm());
}

TEST_CASE("eig_general recovers spectrum with consistent left/right pairs") {
  Matrix m(2, 2);
  m << 2, 1, 0, 3;
  EigResult r = eig_general(m);
  double l0 = std::min(r.eigenvalues(0).real(), r.eigenvalues(1).real());
  double l1 = std::max(r.eigenvalues(0).real(), r.eigenvalues(1).real());
  CHECK(l0 == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(l1 == doctest::Approx(3.0).epsilon(1e-13));
  CHECK((r.left * r.right - Matrix::Identity(2, 2)).norm() < 1e-12);
  CHECK((m * r.right - r.right * r.eigenvalues.asDiagonal().toDenseMatrix()).norm() < 1e-12);
  CHECK(r.diagonalizable);
}

TEST_CASE("eig_general flags a Jordan block as non-diagonalizable") {
  Matrix j(2, 2);
  j << 1, 1, 0, 1;
  EigResult r = eig_general(j);
  CHECK_FALSE(r.diagonalizable);
}

TEST_CASE("trace_norm of sigma_x - sigma_z is 2 sqrt 2 (frozen)") {
  Matrix m = pauli_x() - pauli_z();
  CHECK(trace_norm(m) == doctest::Approx(2.8284271247461903).epsilon(1e-14));
}

TEST_CASE("op_norm and one_norm on fixed matrices") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = -5;
  CHECK(op_norm(d) == doctest::Approx(5.0).epsilon(1e-14));
  Matrix m(2, 2);
  m << 1, -2, 3, 4;
  CHECK(one_norm(m) == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("psd_sqrt and matrix_abs") {
  Matrix h = Matrix::Zero(2, 2);
  h(0, 0) = 2;
  h(1, 1) = 9;
  Matrix s = psd_sqrt(h);
  CHECK(std::abs(s(0, 0) - std::sqrt(2.0)) < 1e-14);
  CHECK(std::abs(s(1, 1) - 3.0) < 1e-14);

  // (sigma_x - sigma_z)^2 = 2 I, so |sigma_x - sigma_z| = sqrt(2) I.
  Matrix a = matrix_abs((pauli_x() - pauli_z()).eval());
  CHECK((a - std::sqrt(2.0) * Matrix::Identity(2, 2)).norm() < 1e-13);
}

TEST_CASE("induced trace norm: identity, scaling, transpose") {
  Superoperator id = Superoperator::identity(2);
  CHECK(induced_trace_norm(id).value == doctest::Approx(1.0).epsilon(1e-10));

  Superoperator twice(2, 2.0 * Matrix::Identity(4, 4));
  CHECK(induced_trace_norm(twice).value == doctest::Approx(2.0).epsilon(1e-10));

  // Transpose map: S swaps vec indices (i + 2j) <-> (j + 2i); singular values
  // are preserved by transposition so the induced norm is exactly 1.
  Matrix swap = Matrix::Zero(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      swap(i + 2 * j, j + 2 * i) = 1.0;
  CHECK(induced_trace_norm(Superoperator(2, swap)).value ==
        doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("induced trace norm of a unitary-conjugation difference is 2 (frozen)") {
  // Phi(X) = sigma_z X sigma_z - X; optimum at |+><+| gives trace norm 2, and
  // the triangle inequality caps the norm at 2.
  Matrix z = pauli_z();
  Matrix s = kron(z.transpose(), z) - Matrix::Identity(4, 4);
  CHECK(induced_trace_norm(Superoperator(2, s)).value ==
        doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("induced trace norm of a trace-to-state map is 1") {
  // Phi(X) = tr(X) sigma with sigma a state: max |tr X| over the unit
  // trace-norm ball is 1, so the induced norm equals 1.
  Matrix sigma(2, 2);
  sigma << 0.75, 0.1, 0.1, 0.25;
  Matrix s = vec(sigma) * vec(Matrix::Identity(2, 2)).adjoint();
  // vec(I)^dag vec(X) = tr(X) under column stacking.
  CHECK(induced_trace_norm(Superoperator(2, s)).value ==
        doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("counter rng is order-independent and in range") {
  CounterRng rng{123, 5};
  double a = rng.uniform(42);
  double b = rng.uniform(7);
  CHECK(rng.uniform(42) == a);
  CHECK(rng.uniform(7) == b);
  CHECK(a != b);
  double mean = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform(static_cast<std::uint64_t>(i));
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    mean += u;
  }
  mean /= n;
  CHECK(std::abs(mean - 0.5) < 0.01);

  double var = 0.0;
  for (int i = 0; i < n; ++i) {
    double g = rng.normal(static_cast<std::uint64_t>(i));
    var += g * g;
  }
  var /= n;
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("line and log-log fits recover exact laws") {
  std::vector<double> x{1, 2, 3, 4, 5}, y;
  for (double v : x) y.push_back(3.0 * v - 2.0);
  LineFit f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(f.intercept == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-13));

  std::vector<double> py;
  for (double v : x) py.push_back(5.0 * v * v);
  LineFit p = fit_loglog(x, py);
  CHECK(p.slope == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(std::exp(p.intercept) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("parallel_for matches sequential fill") {
  const int n = 103;
  std::vector<double> seq(n), par(n);
  auto body_seq = [&](int i) { seq[static_cast<std::size_t>(i)] = std::sqrt(i + 1.0); };
  auto body_par = [&](int i) { par[static_cast<std::size_t>(i)] = std::sqrt(i + 1.0); };
  parallel_for(n, body_seq, 1);
  parallel_for(n, body_par, 4);
  CHECK(seq == par);
}
