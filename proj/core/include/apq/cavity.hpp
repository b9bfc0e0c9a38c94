#pragma once

// Worked stiff-system example: a lossy cavity mode (truncated at n_max
// photons) coupled to a qubit in the bad-cavity regime.  The cavity decay
// kappa*D[a] is the fast part, the exchange Hamiltonian the slow part, and
// eps = g/kappa the scale-separation parameter.  Adiabatic elimination of
// the cavity yields the qubit-only generator with the effective decay rate
// gamma = 4 g^2 / kappa.

#include <vector>

#include "apq/elimination.hpp"
#include "apq/lindblad.hpp"
#include "apq/metrics.hpp"
#include "apq/protocol.hpp"
#include "apq/types.hpp"

namespace apq {

struct CavityModel {
  double omega_q = 1.0;  // qubit frequency (angular units)
  double g = 0.1;        // exchange coupling (same units)
  double kappa = 10.0;   // cavity decay rate
  int n_max = 4;         // Fock cutoff (cavity dimension n_max + 1)

  double epsilon() const { return g / kappa; }
};

// Throws invalid_argument unless kappa > 0, g >= 0, n_max >= 2.  (g = 0 is
// admitted as the no-coupling edge case; the generic regime has g > 0.)
void validate(const CavityModel& m);

// Stiff generator on H_cavity (x) H_qubit (dimension 2*(n_max+1)):
//   fast (physical) = kappa * D[a (x) I];  stored at reference scale
//     eps * kappa * D[a] = g * D[a], so rescaling eps sweeps kappa at
//     fixed g and the slow part never moves.
//   slow = -i [omega_q/2 * I (x) sz + g (a (x) s+ + a^dag (x) s-), .]
// with the tensor split {n_max+1, 2, |0><0|} declared for reduction.
// For g = 0 there is no scale separation: the fast part is stored at its
// physical scale with eps = 1 and the interaction Hamiltonian vanishes.
StiffGenerator build_cavity(const CavityModel& m);

struct PurcellReport {
  double gamma = 0.0;               // decay coefficient read off the reduced generator
  double gamma_formula = 0.0;       // 4 g^2 / kappa
  double max_entry_dev = 0.0;       // reduced vs -i[w sz/2,.] + gamma D[s-], entrywise
  double cutoff_sensitivity = 0.0;  // reduced at n_max vs n_max + 2, entrywise
  Matrix reduced;                   // 4x4 reduced qubit generator
  Matrix target;                    // the closed-form qubit generator
};

// Runs adiabatic elimination on the cavity model and compares the reduced
// qubit generator against the closed-form effective generator.  Requires
// n_max >= 3 so the cutoff-sensitivity probe at n_max + 2 is meaningful.
PurcellReport purcell_check(const CavityModel& m);

// AP sweep in layered-analog mode: eps is swept by scaling kappa at fixed g
// (the stored fast part is kappa-free, so with_epsilon does exactly this).
// Enforces the step-size hypothesis dt <= min(1/omega_q, 1/gamma(eps)) for
// every swept eps and throws invalid_argument on violation.
SweepReport cavity_ap_sweep(const CavityModel& m, const std::vector<double>& dt_grid,
                            const std::vector<double>& eps_grid,
                            NormKind norm = NormKind::induced, int threads = 1);

// Resource-model rows for the swept eps values with the cavity's natural
// slow scale tau_n = 1/g supplied as the override; d_fast = n_max + 1 and
// d_slow = 2 come from the declared split.  At unit constants the savings
// ratio is (n_max + 1)^c / (2 eps), i.e. linear in kappa at fixed g.
std::vector<ResourceEstimate> cavity_resource_table(const CavityModel& m,
                                                    const std::vector<double>& eps_grid,
                                                    double total_time, double delta,
                                                    double c = 1.0);

}  // namespace apq
