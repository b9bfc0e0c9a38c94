#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace apq {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex I_UNIT{0.0, 1.0};

// A linear map on d x d matrices, stored as a d^2 x d^2 matrix acting on
// column-stacked inputs: apply(X) = unvec(mat * vec(X)).  The wrapper exists
// so that dimension d (of the underlying Hilbert space) travels with the
// matrix and d-vs-d^2 mixups become type errors at construction.
struct Superoperator {
  int dim = 0;    // Hilbert-space dimension d
  Matrix mat;     // d^2 x d^2

  Superoperator() = default;
  Superoperator(int d, Matrix m) : dim(d), mat(std::move(m)) {
    if (mat.rows() != static_cast<Eigen::Index>(d) * d ||
        mat.cols() != static_cast<Eigen::Index>(d) * d) {
      throw std::invalid_argument("Superoperator: matrix must be d^2 x d^2");
    }
  }

  static Superoperator identity(int d) {
    return Superoperator(d, Matrix::Identity(static_cast<Eigen::Index>(d) * d,
                                             static_cast<Eigen::Index>(d) * d));
  }
  static Superoperator zero(int d) {
    return Superoperator(d, Matrix::Zero(static_cast<Eigen::Index>(d) * d,
                                         static_cast<Eigen::Index>(d) * d));
  }

  Eigen::Index side() const { return mat.rows(); }

  Matrix apply(const Matrix& x) const;

  Superoperator operator+(const Superoperator& o) const {
    check_same(o);
    return Superoperator(dim, mat + o.mat);
  }
  Superoperator operator-(const Superoperator& o) const {
    check_same(o);
    return Superoperator(dim, mat - o.mat);
  }
  Superoperator operator*(const Superoperator& o) const {
    check_same(o);
    return Superoperator(dim, mat * o.mat);
  }
  friend Superoperator operator*(Complex s, const Superoperator& a) {
    return Superoperator(a.dim, s * a.mat);
  }
  friend Superoperator operator*(double s, const Superoperator& a) {
    return Superoperator(a.dim, s * a.mat);
  }

 private:
  void check_same(const Superoperator& o) const {
    if (dim != o.dim) throw std::invalid_argument("Superoperator: dimension mismatch");
  }
};

} // namespace apq
