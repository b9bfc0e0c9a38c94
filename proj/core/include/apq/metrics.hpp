#pragma once

#include <cstdint>
#include <string>

#include "apq/lindblad.hpp"
#include "apq/types.hpp"

namespace apq {

enum class NormKind { induced, diamond };
std::string to_string(NormKind k);

// ---------------------------------------------------------------------------
// Diamond norm via the Choi-matrix semidefinite characterization.  For a
// Hermiticity-preserving map with Choi matrix J (out (x) in), the value is
//   max_{sigma state on in} || (I (x) sqrt(sigma)) J (I (x) sqrt(sigma)) ||_1,
// the supremum of ||(Phi (x) id)(psi psi^dag)||_1 over purifications
// psi = (I (x) sqrt(sigma)) Omega.  A fixed-point iteration on sigma produces
// a feasible primal point (certified lower bound); a dual decomposition
// Y+ - Y- = J built from the same sigma certifies the upper bound
// lambda_max(tr_out(Y+ + Y-)).  Both certificates are verified by direct
// substitution, so the returned bracket is valid independent of solver state.
// ---------------------------------------------------------------------------
enum class DiamondMethod { sdp_converged, bound_sandwich };
std::string to_string(DiamondMethod m);

struct DiamondResult {
  double value = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  DiamondMethod method = DiamondMethod::bound_sandwich;
  int iterations = 0;
  double duality_gap = 0.0;
  Matrix input_state;  // optimizing sigma on the input factor (d x d)
};

inline constexpr int diamond_iteration_cap = 50000;
inline constexpr double diamond_kkt_tol = 1e-7;
inline constexpr int diamond_dim_cap = 64;  // joint dimension cap

DiamondResult diamond_norm(const Superoperator& s);

DiamondResult diamond_distance(const Channel& a, const Channel& b);
DiamondResult diamond_distance(const Superoperator& a, const Superoperator& b);

// Lower-bound oracle independent of the SDP: multi-start ascent of
// ||(Phi (x) id_d)(psi psi^dag)||_1 over pure inputs psi on the doubled
// space, starting from the maximally entangled state and random states.
double diamond_lower_pure_ascent(const Superoperator& s, int restarts = 8,
                                 std::uint64_t seed = 0xD1A3ULL);

// Superoperator of Phi_A (x) Phi_B acting on the joint system; used for
// ancilla-stability checks (Phi (x) I_n).
Superoperator tensor_superop(const Superoperator& a, const Superoperator& b);
Superoperator tensor_with_identity(const Superoperator& s, int n);

struct SandwichReport {
  double induced = 0.0;
  double diamond = 0.0;
  double d_times_induced = 0.0;
  bool pass = false;
};

// Checks the chain  induced <= diamond <= d * induced  with 1e-8 slack
// (widened by the diamond bracket's duality gap).
SandwichReport norm_sandwich_check(const Superoperator& s);

struct StabilityReport {
  double base = 0.0;      // diamond norm of the map
  double enlarged = 0.0;  // diamond norm of map (x) I_n
  double deviation = 0.0;
  bool pass = false;      // within 1e-5
};

StabilityReport stability_check(const Superoperator& s, int n);

} // namespace apq
