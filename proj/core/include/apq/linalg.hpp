#pragma once

#include <cstdint>

#include "apq/types.hpp"

namespace apq {

// ---------------------------------------------------------------------------
// Vectorization (column stacking).  vec maps a d x d matrix to the d^2 vector
// obtained by stacking its columns; under this convention
//   vec(A X B) = (B^T kron A) vec(X).
// ---------------------------------------------------------------------------
Vector vec(const Matrix& x);
Matrix unvec(const Vector& v, int rows, int cols);
inline Matrix unvec(const Vector& v, int d) { return unvec(v, d, d); }

// Kronecker product (standard convention: (A kron B)(ia*pb+ib, ja*qb+jb) =
// A(ia,ja) * B(ib,jb) for B of size pb x qb).
Matrix kron(const Matrix& a, const Matrix& b);

// Matrix exponential exp(M).  Uses a terminating Taylor series for small
// norms and Pade scaling-and-squaring otherwise; expm(M, t) computes exp(tM).
Matrix expm(const Matrix& m);
inline Matrix expm(const Matrix& m, double t) { return expm((t * m).eval()); }

// ---------------------------------------------------------------------------
// General (non-Hermitian) eigendecomposition with left eigenvectors and a
// conditioning estimate.  right.col(k) is the right eigenvector for
// eigenvalues(k); left.row(k) is the matching left eigenvector, normalized so
// left * right = I.  When the eigenvector matrix is numerically singular
// (1-norm condition estimate above cond_threshold) the matrix is flagged as
// not reliably diagonalizable and `left` is still returned from the
// best-effort inverse.
// ---------------------------------------------------------------------------
struct EigResult {
  Vector eigenvalues;
  Matrix right;        // V, columns = right eigenvectors
  Matrix left;         // V^{-1}, rows = left eigenvectors
  double cond = 0.0;   // ||V||_1 * ||V^{-1}||_1
  bool diagonalizable = true;
};

inline constexpr double eig_cond_threshold = 1e8;

EigResult eig_general(const Matrix& m);

// ---------------------------------------------------------------------------
// Norms.
// ---------------------------------------------------------------------------
double trace_norm(const Matrix& m);   // sum of singular values
double op_norm(const Matrix& m);      // largest singular value
double one_norm(const Matrix& m);     // max absolute column sum

// Positive-semidefinite square root of a Hermitian matrix (negative
// eigenvalues produced by roundoff are clamped to zero).
Matrix psd_sqrt(const Matrix& h);

// Matrix absolute value |M| = (M^dag M)^{1/2} via SVD.
Matrix matrix_abs(const Matrix& m);

// Hermitian part (M + M^dag)/2.
inline Matrix herm_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

// ---------------------------------------------------------------------------
// Induced trace norm ||Phi||_{1->1} = max_{||X||_1 = 1} ||Phi(X)||_1 of the
// superoperator S (acting on vec'd matrices).  The maximum is attained at a
// rank-one X = x y^dag with unit x, y; it is located by alternating polar
// ascent from `restarts` deterministic random starts (counter-based RNG, so
// the result is independent of evaluation order).
// ---------------------------------------------------------------------------
struct InducedNormResult {
  double value = 0.0;
  Vector x;            // optimizer X = x y^dag
  Vector y;
  int iterations = 0;  // total ascent steps across restarts
};

InducedNormResult induced_trace_norm(const Superoperator& s,
                                     int restarts = 16,
                                     std::uint64_t seed = 0x5eedULL);

} // namespace apq
