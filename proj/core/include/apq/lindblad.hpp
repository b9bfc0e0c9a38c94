#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "apq/linalg.hpp"
#include "apq/types.hpp"

namespace apq {

// ---------------------------------------------------------------------------
// Lindbladian generator in GKSL form,
//   L(rho) = -i[H, rho] + sum_k ( L_k rho L_k^dag - 1/2 {L_k^dag L_k, rho} ),
// vectorized under column stacking as
//   -i (I (x) H - H^T (x) I)
//   + sum_k [ conj(L_k) (x) L_k - 1/2 I (x) (L_k^dag L_k)
//                               - 1/2 (L_k^dag L_k)^T (x) I ].
// ---------------------------------------------------------------------------
struct LindbladGenerator {
  int dim = 0;
  Matrix hamiltonian;          // d x d, Hermitian
  std::vector<Matrix> jumps;   // each d x d
  Superoperator superop;       // cached d^2 x d^2 matrix
};

// Builds the generator and verifies its structural invariants: Hermitian
// Hamiltonian (relative 1e-12) and trace annihilation vec(I)^dag L = 0
// (relative 1e-12).  Throws on violation.
LindbladGenerator build_generator(const Matrix& h, const std::vector<Matrix>& jumps);

// ---------------------------------------------------------------------------
// Channels.
// ---------------------------------------------------------------------------
enum class ChannelKind { general_linear, hermiticity_preserving, cp, cptp };

std::string to_string(ChannelKind k);

struct Channel {
  int dim = 0;
  Superoperator map;
  ChannelKind kind = ChannelKind::general_linear;

  Matrix apply(const Matrix& rho) const { return map.apply(rho); }
};

// exp(t L) with CPTP verification; verification failure indicates a
// generator-construction bug and throws.
Channel channel_from_generator(const LindbladGenerator& g, double t);

// Composition a after b (apply b first).
Channel compose(const Channel& a, const Channel& b);

// ---------------------------------------------------------------------------
// Choi / Kraus / Stinespring representations.  Choi convention (out (x) in):
//   J(Phi) = sum_ij Phi(|i><j|) (x) |i><j|,
// so J[(a,i),(b,j)] = S[b d + a, j d + i] under column stacking.
// ---------------------------------------------------------------------------
Matrix choi(const Superoperator& s);
inline Matrix choi(const Channel& c) { return choi(c.map); }

// Inverse reshuffle: superoperator whose Choi matrix is j.
Superoperator superop_from_choi(const Matrix& j, int d);

// Kraus operators from a Choi matrix (PSD up to -1e-10 after unit
// normalization; materially non-PSD input throws).  Eigenvalues below
// 1e-12 * tr(j) are discarded.
std::vector<Matrix> kraus_from_choi(const Matrix& j, int d);
inline std::vector<Matrix> kraus_from_choi(const Matrix& j) {
  int d = static_cast<int>(std::llround(std::sqrt(static_cast<double>(j.rows()))));
  return kraus_from_choi(j, d);
}

Matrix apply_kraus(const std::vector<Matrix>& kraus, const Matrix& rho);

// Stacked isometry V: d -> d*m with V^dag V = I (checked to 1e-8);
// tr_env[V rho V^dag] reproduces the channel, where env is the block index.
Matrix stinespring_isometry(const std::vector<Matrix>& kraus);

// Channel reconstruction from the isometry: tr over the m-dimensional
// environment (outer block index) of V rho V^dag.
Matrix apply_stinespring(const Matrix& v, const Matrix& rho);

// ---------------------------------------------------------------------------
// CPTP verification.
// ---------------------------------------------------------------------------
struct CptpReport {
  bool hermiticity_preserving = false;
  bool cp = false;
  bool tp = false;
  double herm_residual = 0.0;   // ||J - J^dag|| / max(1, ||J||)
  double min_choi_eig = 0.0;    // of J / d (unit-normalized)
  double tp_residual = 0.0;     // ||tr_out J - I||
  ChannelKind kind() const {
    if (cp && tp) return ChannelKind::cptp;
    if (cp) return ChannelKind::cp;
    if (hermiticity_preserving) return ChannelKind::hermiticity_preserving;
    return ChannelKind::general_linear;
  }
};

CptpReport verify_cptp(const Superoperator& s, double psd_tol = 1e-10);

} // namespace apq
