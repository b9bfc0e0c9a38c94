#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "apq/fit.hpp"

namespace apq {

using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// 1D discrete-velocity BGK model in diffusive scaling,
//     df/dt + v df/dx = (M[f] - f) / epsilon,
// on the periodic unit interval.  Distributions are stored in the weighted
// representation: f(i, j) is the density carried by velocity node v_j at
// cell i, with quadrature weights w_j normalized to sum to one, so that
// moments are plain weighted sums:  rho_i = sum_j w_j f(i, j).
//
// Two velocity sets are provided.  The two-velocity set {-c, +c} relaxes
// toward the mass-only equilibrium (both nodes carry rho), which drives the
// flux c*(f+ - f-)/2 to zero and yields the diffusive limit
// d(rho)/dt = (epsilon c^2) d^2(rho)/dx^2 — the viscosity is proportional
// to epsilon.  The eight-point Gauss-Hermite set relaxes toward the
// quadratic-ansatz equilibrium matching mass, momentum, and energy exactly.
// ---------------------------------------------------------------------------
struct KineticState {
  int nx = 0;
  std::vector<double> velocities;  // v_j
  std::vector<double> weights;     // w_j, sum to 1
  RMatrix f;                       // nx x nv, weighted representation
  double dx = 0.0;
  double epsilon = 1.0;
  // Positivity bookkeeping: negative numerical dust in (-1e-12, 0) is
  // clipped to zero during stepping; each clip is counted and the most
  // negative clipped value magnitude is retained.
  long clip_events = 0;
  double worst_clip = 0.0;
};

// Shape/positivity/parameter checks; throws std::invalid_argument.
void validate(const KineticState& s);

// Local-equilibrium initial data for a density profile rho0 : [0,1) -> R+,
// sampled at cell centers x_i = (i + 1/2) dx with dx = 1/nx.
KineticState two_velocity_state(int nx, double epsilon,
                                const std::function<double(double)>& rho0,
                                double speed = 1.0);
KineticState gauss_hermite_state(int nx, double epsilon,
                                 const std::function<double(double)>& rho0);

RVector density(const KineticState& s);   // per-cell sum_j w_j f
RVector momentum(const KineticState& s);  // per-cell sum_j w_j v_j f
RVector energy(const KineticState& s);    // per-cell sum_j w_j v_j^2 f
double total_mass(const KineticState& s);

// Discrete Maxwellian per cell.  Two nodes: mass-matching only (both nodes
// carry rho).  Three or more nodes: quadratic ansatz in v matching mass,
// momentum, and energy exactly.  Throws on negative density.
RMatrix maxwellian(const KineticState& s);

// BGK collision operator values Q(f) = M[f] - f, returned in a state-shaped
// container (the f field holds Q).  Weighted moments of Q vanish: mass
// always; momentum and energy when the equilibrium matches them.
KineticState bgk_collision(const KineticState& s);

// Largest admissible step: 0.9 dx / max|v|.
double cfl_limit(const KineticState& s);

// One AP step: explicit first-order upwind transport, then the exactly
// solvable implicit BGK collision  f <- (f* + (dt/eps) M[f*]) / (1 + dt/eps)
// (the collision conserves the moments entering M, so M[f_new] = M[f*] and
// the implicit solve is closed-form).  Throws on CFL violation; verifies
// per-step mass conservation to 1e-12 relative.
KineticState imex_step(const KineticState& s, double dt);

// Substepped variant: explicit transport, then N = ceil(dt/epsilon) explicit
// relaxation substeps f <- f + (tau/eps)(M - f) with tau = dt/N.  Because M
// is invariant under the substeps, the N-fold map has the closed form
// f <- M + (1 - tau/eps)^N (f - M), evaluated directly so the cost is
// independent of N.
KineticState layered_step(const KineticState& s, double dt);

// ---------------------------------------------------------------------------
// Limiting fluid scheme for the two-velocity model: the epsilon -> 0 limit
// of the AP update on equilibrated data (upwind transport of the two
// equilibrated halves, whose average is a diffusion stencil with the
// scheme's intrinsic numerical viscosity c dx / 2), followed by an implicit
// (backward-Euler) correction carrying the physical viscosity
// nu = epsilon c^2.
// ---------------------------------------------------------------------------
class FluidStepper {
 public:
  // epsilon = 0 gives the strict relaxed-transport limit (zero viscosity).
  FluidStepper(int nx, double dx, double dt, double epsilon, double speed = 1.0);
  RVector step(const RVector& rho) const;

 private:
  int nx_;
  double lambda_;  // c dt / dx
  Eigen::PartialPivLU<RMatrix> solver_;
};

// One-shot convenience wrapper around FluidStepper.
RVector fluid_limit_step(const RVector& rho, double dx, double dt, double epsilon,
                         double speed = 1.0);

// ---------------------------------------------------------------------------
// Grid sweep on the two-velocity model, smooth initial density
// rho0(x) = 1 + 0.5 sin(2 pi x), run to total_time for every
// (epsilon, dt) cell.  Per cell: L2(x, v) distance at final time to a
// time-resolved reference (the same scheme at dt_min/100), L2(x) density
// distance to the strict limiting fluid scheme (zero viscosity) run at the
// same dt, the worst per-step relative mass drift, and the running max |f|.
// ---------------------------------------------------------------------------
struct KineticCell {
  double eps = 0.0;
  double dt = 0.0;
  double l2_error_vs_ref = 0.0;
  double l2_error_vs_fluid = 0.0;
  double mass_drift = 0.0;
  double max_f = 0.0;
};

struct KineticSweepReport {
  int nx = 0;
  double total_time = 0.0;
  double speed = 1.0;
  std::vector<double> eps_grid;
  std::vector<double> dt_grid;
  std::vector<KineticCell> cells;  // eps-major, then dt
  LineFit dt_fit;                  // error-vs-reference slope in dt at the smallest eps
  LineFit eps_fit;                 // fluid-deviation slope in eps at the smallest dt
  double initial_max = 0.0;        // max |f| of the initial data
  bool stable = false;             // every cell: max_f <= initial_max * 1.01
};

// Grids need >= 4 points per axis; every dt must satisfy the CFL bound and
// divide total_time to 1e-9 relative.  Cells are computed in parallel and
// assembled in deterministic order.
KineticSweepReport kinetic_ap_sweep(int nx, const std::vector<double>& eps_grid,
                                    const std::vector<double>& dt_grid,
                                    double total_time = 0.1, double speed = 1.0,
                                    int threads = 1);

// CSV with header eps,dt,l2_error_vs_ref,l2_error_vs_fluid,mass_drift,max_f.
std::string kinetic_sweep_to_csv(const KineticSweepReport& report);

}  // namespace apq
