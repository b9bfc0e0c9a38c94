#include "apq/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

#include "apq/rng.hpp"

namespace apq {

Vector vec(const Matrix& x) {
  return Eigen::Map<const Vector>(x.data(), x.size());
}

Matrix unvec(const Vector& v, int rows, int cols) {
  if (v.size() != static_cast<Eigen::Index>(rows) * cols)
    throw std::invalid_argument("unvec: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Matrix kron(const Matrix& a, const Matrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

Matrix expm(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("expm: square matrix required");
  const double n1 = one_norm(m);
  if (n1 < 0.5) {
    // Terminating Taylor series: with ||M|| < 1/2 the tail after k terms is
    // below 2^{-k}/k!, so ~20 terms reach double precision.
    Matrix term = Matrix::Identity(m.rows(), m.cols());
    Matrix sum = term;
    for (int k = 1; k <= 24; ++k) {
      term = (term * m / static_cast<double>(k)).eval();
      sum += term;
      if (term.cwiseAbs().maxCoeff() < 1e-18 * (1.0 + sum.cwiseAbs().maxCoeff())) break;
    }
    return sum;
  }
  return m.exp();
}

EigResult eig_general(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eig_general: square matrix required");
  Eigen::ComplexEigenSolver<Matrix> es(m, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eig_general: eigensolver failed to converge");
  EigResult r;
  r.eigenvalues = es.eigenvalues();
  r.right = es.eigenvectors();
  Eigen::PartialPivLU<Matrix> lu(r.right);
  r.left = lu.inverse();
  r.cond = one_norm(r.right) * one_norm(r.left);
  r.diagonalizable = std::isfinite(r.cond) && r.cond < eig_cond_threshold;
  return r;
}

double trace_norm(const Matrix& m) {
  return m.jacobiSvd().singularValues().sum();
}

double op_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.jacobiSvd().singularValues()(0);
}

double one_norm(const Matrix& m) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    best = std::max(best, m.col(j).cwiseAbs().sum());
  return best;
}

Matrix psd_sqrt(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("psd_sqrt: eigensolver failed");
  RealVector lam = es.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = lam(i) > 0.0 ? std::sqrt(lam(i)) : 0.0;
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix matrix_abs(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixV() * svd.singularValues().asDiagonal() * svd.matrixV().adjoint();
}

Matrix Superoperator::apply(const Matrix& x) const {
  if (x.rows() != dim || x.cols() != dim)
    throw std::invalid_argument("Superoperator::apply: input must be d x d");
  return unvec((mat * vec(x)).eval(), dim, dim);
}

InducedNormResult induced_trace_norm(const Superoperator& s, int restarts,
                                     std::uint64_t seed) {
  const int d = s.dim;
  InducedNormResult best;
  CounterRng rng{seed, 0xA5CE17ULL};

  for (int start = 0; start < restarts; ++start) {
    const std::uint64_t block = 2 * static_cast<std::uint64_t>(start);
    Vector x = rng.gaussian_vector(d, block);
    Vector y = rng.gaussian_vector(d, block + 1);
    x.normalize();
    y.normalize();

    double value = 0.0;
    int iter = 0;
    for (; iter < 200; ++iter) {
      // Polar step: the dual unitary G = U V^dag of Phi(x y^dag) attains
      // Re tr[G^dag M] = ||M||_1.
      Matrix m = unvec((s.mat * kron(y.conjugate(), x)).eval(), d, d);
      Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const double cur = svd.singularValues().sum();
      Matrix g = svd.matrixU() * svd.matrixV().adjoint();

      // Input step: maximize Re <vec(G), S vec(x y^dag)> = Re y^dag W^dag x
      // with W = unvec(S^dag vec(G)); one power step of W.
      Matrix w = unvec((s.mat.adjoint() * vec(g)).eval(), d, d);
      Vector xn = w * y;
      if (xn.norm() < 1e-300) break;
      xn.normalize();
      Vector yn = w.adjoint() * xn;
      if (yn.norm() < 1e-300) break;
      yn.normalize();
      x = xn;
      y = yn;

      if (cur <= value * (1.0 + 1e-13)) { value = std::max(value, cur); break; }
      value = cur;
    }
    best.iterations += iter;
    if (value > best.value) {
      best.value = value;
      best.x = x;
      best.y = y;
    }
  }
  return best;
}

} // namespace apq
