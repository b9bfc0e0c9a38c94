#include "apq/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace apq {

Vector ket(int d, int i) {
  if (i < 0 || i >= d) throw std::invalid_argument("ket: index out of range");
  Vector v = Vector::Zero(d);
  v(i) = 1.0;
  return v;
}

Matrix ketbra(int d, int i, int j) {
  Matrix m = Matrix::Zero(d, d);
  m(i, j) = 1.0;
  return m;
}

Matrix sigma_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix sigma_y() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

Matrix sigma_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Matrix sigma_plus() { return ketbra(2, 1, 0); }
Matrix sigma_minus() { return ketbra(2, 0, 1); }

Matrix annihilation(int n) {
  if (n < 1) throw std::invalid_argument("annihilation: dimension must be >= 1");
  Matrix a = Matrix::Zero(n, n);
  for (int m = 1; m < n; ++m) a(m - 1, m) = std::sqrt(static_cast<double>(m));
  return a;
}

Matrix number_operator(int n) {
  Matrix m = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) m(k, k) = static_cast<double>(k);
  return m;
}

Matrix partial_trace(const Matrix& m, int d1, int d2, int which) {
  if (m.rows() != static_cast<Eigen::Index>(d1) * d2 || m.rows() != m.cols())
    throw std::invalid_argument("partial_trace: dimension mismatch");
  if (which == 0) {
    Matrix out = Matrix::Zero(d2, d2);
    for (int i2 = 0; i2 < d2; ++i2)
      for (int j2 = 0; j2 < d2; ++j2)
        for (int i1 = 0; i1 < d1; ++i1)
          out(i2, j2) += m(i1 * d2 + i2, i1 * d2 + j2);
    return out;
  }
  if (which == 1) {
    Matrix out = Matrix::Zero(d1, d1);
    for (int i1 = 0; i1 < d1; ++i1)
      for (int j1 = 0; j1 < d1; ++j1)
        for (int i2 = 0; i2 < d2; ++i2)
          out(i1, j1) += m(i1 * d2 + i2, j1 * d2 + i2);
    return out;
  }
  throw std::invalid_argument("partial_trace: which must be 0 or 1");
}

} // namespace apq
