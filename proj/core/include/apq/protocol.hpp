#pragma once

#include <optional>
#include <string>
#include <vector>

#include "apq/elimination.hpp"
#include "apq/fit.hpp"
#include "apq/lindblad.hpp"
#include "apq/metrics.hpp"
#include "apq/types.hpp"

namespace apq {

// ---------------------------------------------------------------------------
// Time-stepping protocols for stiff generators L_eps = eps^{-1} L_fast +
// L_slow: a standard Trotter baseline, a layered protocol (fast relaxation
// layer, then slow layer), and the verification harness that measures how the
// discretization error behaves across (eps, dt) grids.
//
// Every exact factor is built by expm -- the "digital" granularity lives in
// the resource model, not in the numerics.  The only genuinely approximate
// factor is the digital fast substep (truncated Taylor series of order r).
// ---------------------------------------------------------------------------

enum class ProtocolMode { standard_trotter, layered_analog, layered_digital, effective_only };
std::string to_string(ProtocolMode m);

// Which generator drives the slow layer of a layered step: the full slow part
// acting on the total space, or the precomputed second-order effective
// generator supported on ran P.
enum class SlowSource { full_slow, effective };
std::string to_string(SlowSource s);

struct ProtocolConfig {
  ProtocolMode mode = ProtocolMode::standard_trotter;
  double dt = 0.0;           // slow-layer step
  double fast_substep = 0.0; // tau_fast, digital fast layer only
  int fast_order = 2;        // r: Taylor order of the digital fast substep
  int slow_order = 1;        // s in {1, 2}: Trotter order of the step splitting
  double total_time = 0.0;   // T
  const StiffGenerator* stiff = nullptr;
  SlowSource slow_source = SlowSource::full_slow;
};

// Throws invalid_argument on: null stiff, dt <= 0, total_time < dt,
// slow_order not in {1,2}, or (layered-digital) fast_substep <= 0 / fast_order < 1.
void validate(const ProtocolConfig& cfg);

// Number of fast substeps N = ceil(dt / (eps * tau_fast)); >= 1 by
// construction.  Coverage: N * eps * tau_fast >= dt.
long fast_substep_count(const ProtocolConfig& cfg);

// ---------------------------------------------------------------------------
// Single steps.
// ---------------------------------------------------------------------------

// Standard Trotter splitting of exp(dt L_eps).
//   order 1:  exp(dt eps^{-1} L_fast) o exp(dt L_slow)        (slow applied first)
//   order 2:  exp(dt/2 eps^{-1} L_fast) o exp(dt L_slow) o exp(dt/2 eps^{-1} L_fast)
// Each factor is exact expm, hence CPTP; their composition is CPTP.
Channel trotter_step(const StiffGenerator& sg, double dt, int order);

struct TrotterCertificate {
  double bound = 0.0;     // (dt^2/2) * ||[eps^{-1} L_fast, L_slow]||_diamond
  double measured = 0.0;  // diamond distance of the order-1 step to exp(dt L_eps)
  double ratio = 0.0;     // measured / bound (0 when bound underflows)
};

// Certified leading-order bound on the order-1 Trotter step error, with the
// measured error alongside.  For commuting parts the bound is exactly 0.
TrotterCertificate trotter_error_certificate(const StiffGenerator& sg, double dt);

struct StepResult {
  Channel channel;
  long n_substeps = 0;        // fast substeps (1 for analog, 0 when no fast layer)
  bool clipped = false;       // digital fast substep needed CP-cone projection
  double clip_violation = 0.0;  // most negative Choi eigenvalue before clipping
};

// Layered step  Psi = Phi_slow o (Phi_fast)^N  (fast layer applied first).
//   layered-analog : Phi_fast^N collapses to the exact one-shot
//                    exp(dt eps^{-1} L_fast).
//   layered-digital: Phi_fast = order-r truncated Taylor series of
//                    exp(tau_fast L_fast), N = ceil(dt/(eps tau_fast)); if its
//                    Choi matrix dips below -1e-10 it is clipped to the CP
//                    cone and trace-renormalized, and the violation is logged.
// Phi_slow is exp(dt L_slow) (slow_source = full_slow) or
// exp(dt eff) o P (slow_source = effective).
// Throws invalid_argument for standard-trotter / effective-only modes.
StepResult layered_step(const ProtocolConfig& cfg);

// One step of whatever cfg.mode selects (Trotter baseline, layered, or the
// effective-only step exp(dt eff) o P).  Used by evolve and the sweep harness.
StepResult protocol_step(const ProtocolConfig& cfg);

// ---------------------------------------------------------------------------
// Full evolution.
// ---------------------------------------------------------------------------

struct EvolveResult {
  Channel channel;
  long steps = 0;
  CptpReport cptp;           // verification of the composed channel
  double cp_violation = 0.0; // max(0, -min Choi eigenvalue), unit-normalized
  bool clipped = false;
  double clip_violation = 0.0;
};

// Composition of ceil(T/dt) steps of the configured stepper.  The composed
// channel is CPTP-verified with tolerance 1e-8 (approximate steps may leave
// CP by their local error); a violation beyond 1e-4 aborts with a diagnostic
// runtime_error.
EvolveResult evolve(const ProtocolConfig& cfg);

// ---------------------------------------------------------------------------
// Duhamel oracle.  With L0 = eps^{-1} L_fast and the perturbation L_slow, the
// semigroup satisfies the integral identity
//   exp(t L_eps) = exp(t L0) + int_0^t exp((t-s) L0) L_slow exp(s L_eps) ds.
// terms = 1 evaluates exactly this; terms = 2 iterates it once more (both are
// identities, since the innermost propagator stays exact).  Adaptive Simpson
// quadrature, Frobenius tolerance 1e-10 relative; throws runtime_error on
// non-convergence.
// ---------------------------------------------------------------------------
Superoperator duhamel_oracle(const StiffGenerator& sg, double t, int terms);

// The (I-P)-routed part  int_0^t (exp((t-s) L0) - P) L_slow exp(s L_eps) ds,
// whose norm is the interaction error suppressed by the spectral gap: O(eps).
Superoperator duhamel_interaction_term(const StiffGenerator& sg, double t);

// ---------------------------------------------------------------------------
// AP verification sweep.
// ---------------------------------------------------------------------------

struct SweepCell {
  double eps = 0.0;
  double dt = 0.0;
  double consistency_err = 0.0;   // dist(step, exp(dt L_eps))
  double asymptotic_err = 0.0;    // dist(step, exp(dt eff_eps) o P)
  double slow_err = 0.0;          // decomposition: slow-factor substitution
  double fast_err = 0.0;          // decomposition: fast-factor substitution
  double interaction_err = 0.0;   // decomposition: exact-split vs exact step
  double diagram_dist = 0.0;      // dist(step, exp(dt first_order) o P)
  bool triangle_ok = false;       // consistency <= slow+fast+interaction + 1e-8
  bool diamond_checked = false;   // diamond norm spot-check ran on this cell
  double diamond_consistency = 0.0;
  bool clipped = false;
  double clip_violation = 0.0;
};

struct SweepReport {
  ProtocolMode mode = ProtocolMode::layered_analog;
  NormKind norm = NormKind::induced;
  std::vector<double> eps_grid;
  std::vector<double> dt_grid;
  std::vector<SweepCell> cells;       // eps-major, then dt (deterministic)
  std::vector<LineFit> dt_fits;       // per eps: consistency vs dt (p per eps)
  std::vector<LineFit> eps_fits;      // per dt: asymptotic vs eps (q per dt)
  double p_estimate = 0.0;            // median dt-slope of consistency error
  double q_estimate = 0.0;            // median eps-slope of asymptotic error
  double two_term_a = 0.0;            // least-squares fit asymptotic ~ a*eps*dt + b*dt^2
  double two_term_b = 0.0;
  double two_term_residual = 0.0;     // relative l2 misfit of the two-term model
  bool triangle_ok = false;           // all cells
  bool diagram_monotone = false;      // diagram_dist decreasing along eps (1e-9 slack)
};

// Runs the configured protocol on every (eps, dt) cell: proto supplies mode,
// orders, substep, and the stiff reference; eps and dt come from the grids
// (proto.dt / total_time are ignored).  Cells are evaluated independently
// (parallel over cells when threads > 1) and reported in index order, so the
// report is byte-reproducible for any thread count.  Diamond spot-checks run
// on the four corner cells of the grid.  Requires >= 4 points per axis.
SweepReport ap_verify(const ProtocolConfig& proto, const std::vector<double>& eps_grid,
                      const std::vector<double>& dt_grid, NormKind norm, int threads = 1);

// Convenience entry: layered-analog protocol on sg.
SweepReport ap_verify(const StiffGenerator& sg, const std::vector<double>& dt_grid,
                      const std::vector<double>& eps_grid, NormKind norm, int threads = 1);

// CSV projection of the sweep (columns: eps, dt, norm, consistency_err,
// asymptotic_err, slow_err, fast_err, interaction_err, flags).  Values are
// printed with %.17g; flags is a semicolon-joined token list.
std::string sweep_to_csv(const SweepReport& report);

// How the step count is selected.
//   certified: smallest n with n * certificate(T/n) <= delta, i.e. the count a
//     practitioner derives from the commutator bound (closed form, since the
//     accumulated bound is T^2 ||[eps^-1 Lf, Ls]||_dia / (2n)).  This is the
//     count the resource model charges for, and it scales exactly as 1/eps.
//   measured: smallest n whose composed channel is within delta of
//     exp(T L_eps) in the given norm (doubling scan plus binary search).
//     Dissipative fast parts contract transient errors, so the measured count
//     can sit far below the certified one and need not scale as 1/eps.
enum class StepCountMethod { certified, measured };

// Number of equal standard-Trotter steps over [0, T] needed to reach total
// accuracy delta, by the chosen method (deterministic).  The certified count
// realizes the stiffness penalty: it scales as 1/eps at fixed delta.
long trotter_steps_to_accuracy(const StiffGenerator& sg, double total_time, double delta,
                               NormKind norm = NormKind::induced, int order = 1,
                               long cap = 1L << 22,
                               StepCountMethod method = StepCountMethod::certified);

// ---------------------------------------------------------------------------
// Resource model.  Unit constants unless calibrated; poly(1/delta) is
// instantiated as (1/delta)^poly_delta_exponent.
//   tau_1 = eps / gap_fast          (fastest relaxation scale)
//   tau_n = 1 / gap_slow  if the slow part is gapped, else 1 / ||L_slow||
//           (or user-supplied); kappa = tau_n / tau_1.
//   g_std        = C_std    * (T / tau_1) * d_tot^c  * (1/delta)^p
//   g_ap_digital = C_digital* (T / tau_1) * d_tot^c  * (1/delta)^p
//   g_ap_analog  = C_analog * (T / tau_n) * d_slow^c * (1/delta)^p
//   g_ap_elim    = C_elim   * (T / tau_n + d_tot^3) * d_slow^c * (1/delta)^p
//   savings_ratio = g_std / g_ap_analog  ( = kappa * d_fast^c at unit constants)
// ---------------------------------------------------------------------------

struct ResourceCalibration {
  double c_std = 1.0;
  double c_digital = 1.0;
  double c_analog = 1.0;
  double c_elim = 1.0;
  std::optional<double> kappa_override;   // overrides tau_n via tau_n = kappa*tau_1
  std::optional<double> tau_n_override;
};

struct ResourceEstimate {
  double c = 1.0;           // locality exponent
  double kappa = 0.0;       // tau_n / tau_1
  double d_fast = 0.0;
  double d_slow = 0.0;
  double d_tot = 0.0;
  double poly_delta = 0.0;  // (1/delta)^p
  double tau_1 = 0.0;
  double tau_n = 0.0;
  double t_precomp = 0.0;   // d_tot^3 unit-cost classical precomputation
  double g_std = 0.0;
  double g_ap_digital = 0.0;
  double g_ap_analog = 0.0;
  double g_ap_elim = 0.0;
  double savings_ratio = 0.0;  // g_std / g_ap_analog
};

// Requires a declared tensor split on cfg.stiff (throws invalid_argument
// otherwise).
ResourceEstimate resource_model(const ProtocolConfig& cfg, double c, double delta,
                                double poly_delta_exponent = 1.0,
                                const ResourceCalibration& cal = {});

} // namespace apq
