#pragma once

#include "apq/types.hpp"

namespace apq {

// Basis vectors and rank-one projectors.
Vector ket(int d, int i);
Matrix ketbra(int d, int i, int j);

// Pauli matrices and ladder operators on the qubit.
Matrix sigma_x();
Matrix sigma_y();
Matrix sigma_z();
Matrix sigma_plus();   // |1><0|  (raises the sigma_z eigenvalue)
Matrix sigma_minus();  // |0><1|

// Truncated bosonic annihilation operator on an n-dimensional Fock space:
// a |m> = sqrt(m) |m-1>, m = 0..n-1.
Matrix annihilation(int n);
Matrix number_operator(int n);

// Commutators.
inline Matrix comm(const Matrix& a, const Matrix& b) { return a * b - b * a; }
inline Matrix acomm(const Matrix& a, const Matrix& b) { return a * b + b * a; }

// Maximally mixed state.
inline Matrix maximally_mixed(int d) {
  return Matrix::Identity(d, d) / static_cast<double>(d);
}

// Partial trace over one factor of H1 (x) H2 with joint index i1*d2 + i2.
// which = 0 traces out the first factor (result on H2); which = 1 traces out
// the second (result on H1).
Matrix partial_trace(const Matrix& m, int d1, int d2, int which);

} // namespace apq
