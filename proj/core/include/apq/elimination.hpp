#pragma once

#include <optional>
#include <vector>

#include "apq/lindblad.hpp"
#include "apq/spectral.hpp"
#include "apq/types.hpp"

namespace apq {

// ---------------------------------------------------------------------------
// Adiabatic elimination of a stiff Lindbladian
//     L_eps = eps^{-1} L_fast + L_slow.
// The fast part is stored at reference scale (comparable to the slow part);
// the physical fast generator is eps^{-1} * fast.
// ---------------------------------------------------------------------------

// Declared fast (x) slow tensor factorization.  The fast factor is the FIRST
// tensor factor throughout (matching kron and partial_trace conventions).
struct TensorSplit {
  int d_fast = 0;
  int d_slow = 0;
  Matrix fast_steady;  // d_fast x d_fast density matrix: steady state of the
                       // fast factor alone
};

struct StiffGenerator {
  LindbladGenerator fast;
  LindbladGenerator slow;
  double epsilon = 1.0;
  std::optional<TensorSplit> split;
  // Declared Hamiltonian split H_slow = H_drift + H_interaction; enables the
  // Hamiltonian-level centering diagnostic (requires `split` as well).
  std::optional<Matrix> h_interaction;
  SpectralData spectral_fast;  // spectral analysis of fast.superop

  // eps^{-1} fast + slow.
  Superoperator full() const;
};

// Validates epsilon > 0, dimension agreement, split/interaction consistency,
// and that the assembled full generator annihilates the trace and has
// left-half-plane spectrum; runs the fast-part spectral analysis.  Throws on
// violation.
StiffGenerator make_stiff(const LindbladGenerator& fast, const LindbladGenerator& slow,
                          double epsilon,
                          std::optional<TensorSplit> split = std::nullopt,
                          std::optional<Matrix> h_interaction = std::nullopt);

// Same generator pair at a different stiffness (no revalidation: a positive
// combination of two Lindbladians is a Lindbladian).
StiffGenerator with_epsilon(const StiffGenerator& sg, double epsilon);

// ---------------------------------------------------------------------------
// Centering condition: the slow part must not couple ker(L_fast) to its
// complement at first order.
// ---------------------------------------------------------------------------
struct CenteringReport {
  bool satisfied = false;
  double residual = 0.0;          // ||P L_slow (I-P)||, induced trace norm
  double reverse_residual = 0.0;  // ||(I-P) L_slow P||
  double slow_norm = 0.0;         // ||L_slow||, induced trace norm
  // ||Pi H_int Pi|| with Pi = (support of fast_steady) (x) I_slow; present
  // only when both a tensor split and an interaction Hamiltonian are
  // declared.  The operative check is the superoperator residual above; the
  // two levels genuinely differ (a model can be centered at the Hamiltonian
  // level and not at the superoperator level).
  std::optional<double> hamiltonian_residual;
};

// satisfied iff residual <= 1e-10 * slow_norm.
CenteringReport centering_check(const StiffGenerator& sg);

// ---------------------------------------------------------------------------
// Second-order effective generator on the slow manifold,
//     eff = P L_slow P - P L_slow (eps^{-1} L_fast)^+ (I-P) L_slow P,
// where (eps^{-1} L_fast)^+ = eps * (L_fast)^+ is the Drazin inverse of the
// physical fast part.  first_order and second_order are the two summands at
// physical scale, so eff = first_order + second_order exactly.
// ---------------------------------------------------------------------------
struct CptpVerdict {
  bool cptp = true;
  double violation = 0.0;  // worst (-lambda_min(Choi(exp(t*gen))))_+ over samples
  double worst_t = 0.0;
};

struct EffectiveGenerator {
  int dim = 0;                    // full Hilbert-space dimension
  double epsilon = 0.0;
  Superoperator eff;
  Superoperator first_order;
  Superoperator second_order;
  Superoperator projection;       // kernel projector P of the fast part
  // Compression X_slow -> tr_fast[eff(fast_steady (x) X_slow)] as a
  // d_slow^2 x d_slow^2 matrix; present when a tensor split is declared.
  std::optional<Matrix> reduced;
  CenteringReport centering;  // warn-and-proceed: eff is emitted even when
                              // centering fails, but error-bound claims are
                              // void then
  CptpVerdict cptp_verdict;   // default time-sample CPTP check
};

EffectiveGenerator effective_generator(const StiffGenerator& sg);

// PSD test of Choi(exp(t * reduced)) at each sampled t (falls back to
// exp(t * eff) composed with the kernel projector on the full space when no
// reduced compression is available).  cptp iff violation <= 1e-8.
CptpVerdict cptp_second_order_check(const EffectiveGenerator& eg,
                                    const std::vector<double>& t_samples);

// ---------------------------------------------------------------------------
// Exact Schur complement oracle.  In the spectral basis of the fast part
// (kernel block first), with slow blocks A = P L_slow P, B = P L_slow (I-P),
// C = (I-P) L_slow P, E = (I-P) L_slow (I-P) and fast block D,
//     S_eps = A - eps B (D + eps E)^{-1} C,
// returned lifted back to the full space (supported on ran P).  Refuses
// (std::domain_error) when eps * gap_fast < 1e3 * machine_eps * ||L_slow||,
// where the inversion is no longer trustworthy.
// ---------------------------------------------------------------------------
struct SchurResult {
  Superoperator schur;
  double fast_block_condition = 0.0;  // spectral condition number of D + eps E
  double epsilon = 0.0;
};

SchurResult exact_schur(const StiffGenerator& sg, double epsilon);

} // namespace apq
