#include <cmath>
#include <vector>

#include "doctest.h"

#include "apq/elimination.hpp"
#include "apq/fit.hpp"
#include "apq/linalg.hpp"
#include "apq/lindblad.hpp"
#include "apq/operators.hpp"
#include "apq/rng.hpp"
#include "apq/spectral.hpp"
#include "support/oracles.hpp"

#include <unsupported/Eigen/MatrixFunctions>

using namespace apq;

namespace {

// Damped cavity coupled to a qubit (cavity = fast factor, qubit = slow
// factor).  Stored fast part is g*D[a (x) I]; with eps = g/kappa the physical
// fast part eps^{-1}*fast equals kappa*D[a (x) I].
StiffGenerator cavity_stiff(double omega_q, double g, double kappa, int n_max) {
  const int dc = n_max + 1;
  const Matrix a = annihilation(dc);
  const Matrix ic = Matrix::Identity(dc, dc);
  const Matrix i2 = Matrix::Identity(2, 2);

  LindbladGenerator fast =
      build_generator(Matrix::Zero(2 * dc, 2 * dc), {std::sqrt(g) * kron(a, i2)});

  const Matrix h_int = g * (kron(a, sigma_plus()) + kron(a.adjoint(), sigma_minus()));
  const Matrix h_slow = 0.5 * omega_q * kron(ic, sigma_z()) + h_int;
  LindbladGenerator slow = build_generator(h_slow, {});

  Matrix vac = Matrix::Zero(dc, dc);
  vac(0, 0) = 1.0;
  return make_stiff(fast, slow, g / kappa, TensorSplit{dc, 2, vac}, h_int);
}

Matrix purcell_target(double omega_q, double g, double kappa) {
  const double gamma = 4.0 * g * g / kappa;
  return build_generator(0.5 * omega_q * sigma_z(), {std::sqrt(gamma) * sigma_minus()})
      .superop.mat;
}

// Random qutrit (fast) x qubit (slow) stiff model with a declared split.
StiffGenerator random_bipartite(std::uint64_t seed) {
  const Matrix i2 = Matrix::Identity(2, 2);
  const Matrix i3 = Matrix::Identity(3, 3);
  LindbladGenerator fast = build_generator(Matrix::Zero(6, 6), {kron(annihilation(3), i2)});
  Matrix h = testing::random_hermitian(6, seed);
  LindbladGenerator slow = build_generator(h, {std::sqrt(0.3) * kron(i3, sigma_minus())});
  Matrix ground = Matrix::Zero(3, 3);
  ground(0, 0) = 1.0;
  return make_stiff(fast, slow, 0.01, TensorSplit{3, 2, ground});
}

} // namespace

TEST_CASE("make_stiff validates inputs and assembles the full generator") {
  StiffGenerator sg = cavity_stiff(1.0, 0.1, 10.0, 2);

  // full() = eps^{-1} fast + slow = kappa D[a (x) I] + slow.
  const int d = 6;
  const Matrix a = annihilation(3);
  const Matrix i2 = Matrix::Identity(2, 2);
  LindbladGenerator phys_fast =
      build_generator(Matrix::Zero(d, d), {std::sqrt(10.0) * kron(a, i2)});
  const Matrix expected = phys_fast.superop.mat + sg.slow.superop.mat;
  CHECK((sg.full().mat - expected).cwiseAbs().maxCoeff() < 1e-11);

  // with_epsilon rescales only the fast part.
  StiffGenerator sg2 = with_epsilon(sg, sg.epsilon / 2.0);
  const Matrix fast_part = sg.full().mat - sg.slow.superop.mat;
  const Matrix fast_part2 = sg2.full().mat - sg2.slow.superop.mat;
  CHECK((fast_part2 - 2.0 * fast_part).cwiseAbs().maxCoeff() < 1e-9);

  // Validation failures.
  LindbladGenerator qubit_gen = build_generator(sigma_z(), {});
  CHECK_THROWS_AS(make_stiff(sg.fast, qubit_gen, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(make_stiff(sg.fast, sg.slow, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_stiff(sg.fast, sg.slow, -1.0), std::invalid_argument);

  Matrix bad_steady = Matrix::Identity(3, 3);  // trace 3, not a state
  CHECK_THROWS_AS(make_stiff(sg.fast, sg.slow, 0.1, TensorSplit{3, 2, bad_steady}),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_stiff(sg.fast, sg.slow, 0.1, TensorSplit{2, 2, sg.split->fast_steady}),
                  std::invalid_argument);

  Matrix non_herm = Matrix::Zero(d, d);
  non_herm(0, 1) = 1.0;
  CHECK_THROWS_AS(make_stiff(sg.fast, sg.slow, 0.1, sg.split, non_herm),
                  std::invalid_argument);
}

TEST_CASE("zero slow part eliminates to the zero effective generator") {
  const Matrix i2 = Matrix::Identity(2, 2);
  LindbladGenerator fast = build_generator(Matrix::Zero(4, 4), {kron(sigma_minus(), i2)});
  LindbladGenerator slow = build_generator(Matrix::Zero(4, 4), {});
  Matrix ground = Matrix::Zero(2, 2);
  ground(0, 0) = 1.0;
  StiffGenerator sg = make_stiff(fast, slow, 0.05, TensorSplit{2, 2, ground});

  CenteringReport cr = centering_check(sg);
  CHECK(cr.satisfied);
  CHECK(cr.residual == 0.0);

  EffectiveGenerator eg = effective_generator(sg);
  CHECK(op_norm(eg.eff.mat) < 1e-14);
  REQUIRE(eg.reduced.has_value());
  CHECK(eg.reduced->cwiseAbs().maxCoeff() < 1e-14);
  // Identity semigroup is CPTP.
  CHECK(eg.cptp_verdict.cptp);
  CHECK(eg.cptp_verdict.violation == 0.0);
}

TEST_CASE("cavity centering: fails at superoperator level, centered at Hamiltonian level") {
  const double g = 0.1;
  StiffGenerator sg = cavity_stiff(1.0, g, 10.0, 2);
  CenteringReport cr = centering_check(sg);

  // The interaction maps coherence sectors back into the kernel with weight g,
  // so the superoperator-level condition fails by a margin of order g.
  CHECK_FALSE(cr.satisfied);
  CHECK(cr.residual > 0.5 * g);
  CHECK(cr.reverse_residual > 0.5 * g);
  CHECK(cr.slow_norm > 0.5);

  // Hamiltonian level: the declared interaction has no matrix element within
  // the vacuum slice, <0|a|0> = 0.
  REQUIRE(cr.hamiltonian_residual.has_value());
  CHECK(*cr.hamiltonian_residual < 1e-14);

  // A drive acting on the fast factor alone is invisible to the forward
  // residual here: the kernel projector ends in a partial trace over the
  // cavity, and partial traces annihilate commutators on the traced factor.
  // The violation is caught by the reverse diagnostic instead.
  const Matrix i2 = Matrix::Identity(2, 2);
  const Matrix a = annihilation(3);
  LindbladGenerator drive = build_generator(kron(a + a.adjoint(), i2), {});
  StiffGenerator sg2 = make_stiff(sg.fast, drive, sg.epsilon, sg.split);
  CenteringReport cr2 = centering_check(sg2);
  CHECK(cr2.satisfied);
  CHECK(cr2.residual < 1e-12);
  CHECK(cr2.reverse_residual > 0.1);
}

TEST_CASE("a fast-factor drive violates centering when the fast kernel is degenerate") {
  // Dephasing keeps both populations of the fast qubit stationary, so the
  // kernel projector is not a partial-trace compression and a sigma_x drive
  // on the fast factor produces a genuine forward residual.
  const Matrix i2 = Matrix::Identity(2, 2);
  LindbladGenerator fast = build_generator(Matrix::Zero(4, 4), {kron(sigma_z(), i2)});
  LindbladGenerator drive = build_generator(kron(sigma_x(), i2), {});
  StiffGenerator sg = make_stiff(fast, drive, 0.1);
  CHECK(sg.spectral_fast.kernel_dim == 8);

  CenteringReport cr = centering_check(sg);
  CHECK_FALSE(cr.satisfied);
  CHECK(cr.residual > 0.1);
}

TEST_CASE("hamiltonian-level residual is nonzero for mixed fast steady state") {
  const double nbar = 0.5;
  const Matrix i2 = Matrix::Identity(2, 2);
  LindbladGenerator fast = build_generator(
      Matrix::Zero(4, 4),
      {kron(sigma_minus(), i2), std::sqrt(nbar) * kron(sigma_plus(), i2)});
  Matrix steady_f = Matrix::Zero(2, 2);
  steady_f(0, 0) = 1.0 / (1.0 + nbar);
  steady_f(1, 1) = nbar / (1.0 + nbar);

  const Matrix h_int = 0.7 * kron(sigma_z(), sigma_x());
  LindbladGenerator slow = build_generator(h_int + 0.5 * kron(i2, sigma_z()), {});
  StiffGenerator sg = make_stiff(fast, slow, 0.05, TensorSplit{2, 2, steady_f}, h_int);

  CenteringReport cr = centering_check(sg);
  // Full-rank fast steady state: the support projector is the identity, so
  // the Hamiltonian-level residual is the full interaction norm.
  REQUIRE(cr.hamiltonian_residual.has_value());
  CHECK(*cr.hamiltonian_residual == doctest::Approx(0.7).epsilon(1e-10));
  CHECK_FALSE(cr.satisfied);

  // The second-order reduced generator stays completely positive here.
  EffectiveGenerator eg = effective_generator(sg);
  CHECK(eg.cptp_verdict.cptp);
}

TEST_CASE("Purcell: reduced generator matches the analytic qubit target") {
  const double omega_q = 1.0, g = 0.1, kappa = 10.0;
  StiffGenerator sg = cavity_stiff(omega_q, g, kappa, 4);
  EffectiveGenerator eg = effective_generator(sg);

  REQUIRE(eg.reduced.has_value());
  const Matrix target = purcell_target(omega_q, g, kappa);
  CHECK((*eg.reduced - target).cwiseAbs().maxCoeff() < 1e-12);

  // Cutoff insensitivity: the interaction explores only one excitation above
  // the vacuum slice, so the reduction is cutoff-exact.
  StiffGenerator sg6 = cavity_stiff(omega_q, g, kappa, 6);
  EffectiveGenerator eg6 = effective_generator(sg6);
  CHECK((*eg.reduced - *eg6.reduced).cwiseAbs().maxCoeff() < 1e-12);

  // Support invariant: eff annihilates ran(I-P) on both sides.
  const int n = eg.eff.mat.rows();
  const Matrix q = Matrix::Identity(n, n) - eg.projection.mat;
  const double scale = op_norm(eg.eff.mat);
  CHECK(op_norm(q * eg.eff.mat) < 1e-10 * scale);
  CHECK(op_norm(eg.eff.mat * q) < 1e-10 * scale);

  // The Purcell generator is GKSL, hence CPTP at all sampled times.
  CHECK(eg.cptp_verdict.cptp);
  CHECK(eg.cptp_verdict.violation < 1e-10);

  // Physical epsilon scaling of the second-order term: halving epsilon
  // (doubling kappa at fixed g) halves the Purcell correction.
  EffectiveGenerator eg_half = effective_generator(with_epsilon(sg, sg.epsilon / 2.0));
  CHECK(op_norm(eg_half.second_order.mat) ==
        doctest::Approx(0.5 * op_norm(eg.second_order.mat)).epsilon(1e-10));
}

TEST_CASE("exact Schur complement: order-two expansion, kernel correspondence, refusal") {
  StiffGenerator sg = cavity_stiff(1.0, 0.1, 10.0, 2);
  EffectiveGenerator base = effective_generator(sg);
  const Matrix second_unit = base.second_order.mat / base.epsilon;

  // || S_eps - (first + eps * second_unit) || = O(eps^2).  For the resonant
  // cavity the quadratic coefficient of the remainder cancels exactly, so the
  // measured decay is cubic -- still consistent with (and sharper than) the
  // quadratic bound.  The generic quadratic slope is pinned on the random
  // bipartite model below.
  std::vector<double> eps_grid = {1e-2, 3e-3, 1e-3, 3e-4};
  std::vector<double> errs;
  for (double e : eps_grid) {
    SchurResult sr = exact_schur(sg, e);
    CHECK(sr.fast_block_condition > 1.0);
    const Matrix pred = base.first_order.mat + e * second_unit;
    errs.push_back(op_norm(sr.schur.mat - pred));
  }
  LineFit fit = fit_loglog(eps_grid, errs);
  CHECK(fit.slope > 1.8);   // never slower than the quadratic bound
  CHECK(fit.slope > 2.8);   // frozen: cavity remainder is cubic
  CHECK(fit.slope < 3.2);

  // Kernel correspondence: the P-compressed steady state of the full
  // generator at finite eps lies in ker(S_eps) -- an exact block identity.
  const double eps = 0.01;
  StiffGenerator sge = with_epsilon(sg, eps);
  SpectralData full_sd = analyze(sge.full());
  REQUIRE(full_sd.kernel_dim == 1);
  Vector v = vec(full_sd.steady_state);
  Vector w = sge.spectral_fast.projection.mat * v;
  SchurResult sr = exact_schur(sg, eps);
  CHECK((sr.schur.mat * w).norm() <= 1e-8 * op_norm(sr.schur.mat) * w.norm());

  // Conditioning floor.
  CHECK_THROWS_AS(exact_schur(sg, 1e-18), std::domain_error);
}

TEST_CASE("random bipartite model: Schur slope two and dynamics convergence at rate epsilon") {
  StiffGenerator sg = random_bipartite(0x51AB1E);

  // Kernel structure: fast part has a four-dimensional kernel (vacuum slice).
  CHECK(sg.spectral_fast.kernel_dim == 4);

  EffectiveGenerator base = effective_generator(sg);
  const Matrix second_unit = base.second_order.mat / base.epsilon;
  CHECK_FALSE(base.centering.satisfied);  // generic coupling: warn-and-proceed

  // Support invariant on the random model too.
  const int n = base.eff.mat.rows();
  const Matrix q = Matrix::Identity(n, n) - base.projection.mat;
  CHECK(op_norm(q * base.eff.mat) < 1e-10 * op_norm(base.eff.mat));
  CHECK(op_norm(base.eff.mat * q) < 1e-10 * op_norm(base.eff.mat));

  std::vector<double> eps_grid = {1e-1, 3e-2, 1e-2, 3e-3};
  std::vector<double> schur_errs;
  for (double e : eps_grid) {
    SchurResult sr = exact_schur(sg, e);
    const Matrix pred = base.first_order.mat + e * second_unit;
    schur_errs.push_back(op_norm(sr.schur.mat - pred));
  }
  LineFit sfit = fit_loglog(eps_grid, schur_errs);
  CHECK(sfit.slope > 1.8);
  CHECK(sfit.slope < 2.2);

  // Dynamics: || exp(T L_eps) - exp(T eff_eps) P || = O(eps) at T = 1.
  std::vector<double> dyn_eps = {3e-2, 1e-2, 3e-3, 1e-3};
  std::vector<double> dyn_errs;
  for (double e : dyn_eps) {
    StiffGenerator sge = with_epsilon(sg, e);
    EffectiveGenerator eg = effective_generator(sge);
    const Matrix lhs = expm(sge.full().mat);
    const Matrix rhs = expm(eg.eff.mat) * eg.projection.mat;
    dyn_errs.push_back(op_norm(lhs - rhs));
  }
  LineFit dfit = fit_loglog(dyn_eps, dyn_errs);
  CHECK(dfit.slope > 0.85);
  CHECK(dfit.slope < 1.15);

  // The bipartite reduction is completely positive (frozen empirical outcome,
  // consistent with the stationary-correlation positivity structure).
  CHECK(base.cptp_verdict.cptp);
}

TEST_CASE("adversarial elimination: classical stiff chain with negative effective rate") {
  // Fast part: symmetric exchange within {2,3} -- its kernel is degenerate
  // (populations of 0 and 1, their mutual coherences, and the exchange-mixed
  // pair), so no faithful stationary state exists and the second-order
  // truncation can push an effective transition rate negative.
  std::vector<Matrix> fj = {ketbra(4, 2, 3), ketbra(4, 3, 2)};
  LindbladGenerator fast = build_generator(Matrix::Zero(4, 4), fj);

  struct Rate {
    int from, to;
    double r;
  };
  const std::vector<Rate> rates = {{1, 0, 0.53}, {3, 1, 0.52}, {0, 2, 0.45}, {1, 2, 0.64},
                                   {3, 2, 0.29}, {1, 3, 0.63}, {2, 3, 0.42}};
  std::vector<Matrix> sj;
  for (const auto& rt : rates) sj.push_back(std::sqrt(rt.r) * ketbra(4, rt.to, rt.from));
  LindbladGenerator slow = build_generator(Matrix::Zero(4, 4), sj);

  StiffGenerator sg = make_stiff(fast, slow, 0.1);
  CHECK(sg.spectral_fast.kernel_dim == 5);

  EffectiveGenerator eg = effective_generator(sg);
  CHECK_FALSE(eg.cptp_verdict.cptp);
  CHECK(eg.cptp_verdict.violation > 1e-8);
  // Frozen magnitude band for regression (measured 1.36e-4 at eps = 0.1).
  CHECK(eg.cptp_verdict.violation > 1e-5);
  CHECK(eg.cptp_verdict.violation < 1e-2);
  CHECK(eg.cptp_verdict.worst_t > 0.0);

  // Explicit sample check through the public interface.
  CptpVerdict v2 = cptp_second_order_check(eg, {0.02, 0.05, 0.1});
  CHECK(v2.violation > 1e-8);
}
