#pragma once

#include "apq/lindblad.hpp"
#include "apq/metrics.hpp"
#include "apq/types.hpp"

namespace apq {

// ---------------------------------------------------------------------------
// Spectral structure of a Lindbladian: kernel projector, spectral gap, Drazin
// inverse, steady state, primitivity verdict.
// ---------------------------------------------------------------------------
struct SpectralData {
  int dim = 0;               // Hilbert-space dimension d
  Superoperator generator;   // the analyzed superoperator (copy)
  Vector eigenvalues;
  double gap = 0.0;          // min |Re lambda| over the non-kernel spectrum
  int kernel_dim = 0;
  Superoperator projection;  // spectral projector P onto ker L
  Superoperator drazin;      // L^+ (zero on ran P, inverse on the complement)
  Matrix steady_state;       // normalized P(I/d); the unique steady state when
                             // kernel_dim = 1
  bool primitive = false;    // kernel_dim = 1 and full-rank steady state
  bool gapped_unique = false;  // kernel_dim = 1 and gap > 0
  double eigen_condition = 0.0;
  bool diagonalizable = true;
  double tol_zero = 0.0;
};

// Eigendecomposition-based analysis.  Throws if the kernel is empty (every
// Lindbladian has 0 in its spectrum — an empty kernel means the input is not
// one, or the tolerance model failed).
SpectralData analyze(const Superoperator& s);
inline SpectralData analyze(const LindbladGenerator& g) { return analyze(g.superop); }

// ---------------------------------------------------------------------------
// Independent cross-checks.
// ---------------------------------------------------------------------------
struct DrazinReport {
  double quad_rel_error = 0.0;  // || quadrature - L^+ || / || L^+ ||
  double drazin_norm = 0.0;     // induced trace norm of L^+
  double ratio = 0.0;           // drazin_norm * gap (reported; can exceed 1)
  double ratio_spectral = 0.0;  // ||L^+||_2 * gap (<= 1 for normal L with
                                // gap = min |Re lambda| <= min |lambda|)
  bool converged = false;
};

// Verifies drazin against the integral formula L^+ = -int_0^Tcut e^{tL}(I-P) dt
// with Tcut = 40/gap, by Richardson-refined composite Simpson quadrature to
// 1e-6 relative.
DrazinReport drazin_check(const SpectralData& sd);

struct PrimitivityReport {
  bool primitive = false;
  bool gapped_unique = false;
  int kernel_dim = 0;
  double steady_min_eig = 0.0;
  double min_output_eig = 0.0;  // over exp(t0 L) of d^2 tomography basis states
};

// Full-rank relaxation test at t0 = 10/gap on a d^2 tomography basis.
PrimitivityReport primitivity_test(const LindbladGenerator& g);

struct DecayFit {
  double rate = 0.0;       // fitted exponential decay rate of ||exp(tL) - P||
  double prefactor = 0.0;  // fitted C in C e^{-rate t}
  double r_squared = 0.0;
  int points_used = 0;
};

// Least-squares fit of log||exp(tL) - P|| over t in {1..20}/gap; points below
// the 1e-13 noise floor are excluded.  Requires kernel_dim = 1.
DecayFit decay_rate_fit(const LindbladGenerator& g, NormKind norm);

struct ResolventReport {
  double k_measured = 0.0;  // max over sampled zeta of ||(zeta-L)^{-1}(I-P)|| (gap-|zeta|)
  bool pass = false;        // k_measured <= 10
};

// Samples zeta in (-gap/2, gap/2) and measures the resolvent constant.
ResolventReport resolvent_check(const SpectralData& sd);

// Residual ||(1/T) int_0^T exp(tL) dt - P|| by quadrature at T = 1e3/gap.
double ergodic_average_residual(const SpectralData& sd);

} // namespace apq
