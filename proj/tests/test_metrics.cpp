#include "doctest.h"

#include <cmath>

#include "apq/lindblad.hpp"
#include "apq/linalg.hpp"
#include "apq/metrics.hpp"
#include "apq/operators.hpp"
#include "support/oracles.hpp"

using namespace apq;
using namespace apq::testing;

namespace {

// Difference between identity and the phase-flip channel
// rho -> (1-p) rho + p Z rho Z; its diamond norm is exactly 2p.
Superoperator phase_flip_difference(double p) {
  Matrix z = sigma_z();
  Matrix s = p * (Matrix::Identity(4, 4) - kron(z, z));
  return Superoperator(2, s);
}

Superoperator transpose_map(int d) {
  Matrix s = Matrix::Zero(static_cast<Eigen::Index>(d) * d,
                          static_cast<Eigen::Index>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      s(i + d * j, j + d * i) = 1.0;
  return Superoperator(d, s);
}

} // namespace

TEST_CASE("diamond norm of the zero map is 0") {
  DiamondResult r = diamond_norm(Superoperator::zero(3));
  CHECK(r.value == 0.0);
  CHECK(r.method == DiamondMethod::sdp_converged);
}

TEST_CASE("diamond norm of CPTP channels is 1 within 1e-6") {
  for (std::uint64_t seed : {11ULL, 12ULL, 13ULL}) {
    LindbladGenerator g = random_generator(3, seed, 2);
    Channel c = channel_from_generator(g, 0.6);
    DiamondResult r = diamond_norm(c.map);
    CHECK(std::abs(r.value - 1.0) <= 1e-6);
    CHECK(r.duality_gap <= 1e-6);
    CHECK(r.lower_bound <= r.value + 1e-15);
    CHECK(r.value <= r.upper_bound + 1e-15);
  }
}

TEST_CASE("diamond norm of identity-minus-phase-flip is 2p (frozen 0.5)") {
  DiamondResult r = diamond_norm(phase_flip_difference(0.25));
  CHECK(std::abs(r.value - 0.5) <= 1e-6);
  CHECK(r.method == DiamondMethod::sdp_converged);
  CHECK(r.duality_gap <= 1e-6);
}

TEST_CASE("CP non-TP map hits the closed-form value lambda_max(A^dag A)") {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  Superoperator s(2, kron(a.conjugate(), a));  // X -> A X A^dag
  DiamondResult r = diamond_norm(s);
  CHECK(r.value == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(r.duality_gap <= 1e-10);
}

TEST_CASE("transpose map: diamond = d at the upper sandwich edge") {
  Superoperator t = transpose_map(2);
  DiamondResult r = diamond_norm(t);
  CHECK(std::abs(r.value - 2.0) <= 1e-6);
  SandwichReport sw = norm_sandwich_check(t);
  CHECK(sw.pass);
  CHECK(sw.induced == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sw.d_times_induced == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("diamond distance of a channel to itself is 0") {
  LindbladGenerator g = random_generator(2, 21);
  Channel c = channel_from_generator(g, 0.4);
  DiamondResult r = diamond_distance(c, c);
  CHECK(r.value <= 1e-12);
}

TEST_CASE("pure-input ascent oracle matches the SDP on the phase-flip difference") {
  Superoperator s = phase_flip_difference(0.25);
  const double oracle = diamond_lower_pure_ascent(s);
  CHECK(std::abs(oracle - 0.5) <= 1e-6);
  DiamondResult r = diamond_norm(s);
  CHECK(std::abs(oracle - r.value) <= 1e-4);
}

TEST_CASE("tensor_superop reproduces Kraus (x) identity action") {
  LindbladGenerator g = random_generator(2, 31);
  Channel c = channel_from_generator(g, 0.5);
  auto kraus = kraus_from_choi(choi(c), 2);
  Superoperator joint = tensor_with_identity(c.map, 3);
  CHECK(joint.dim == 6);

  CounterRng rng{41, 7};
  Matrix x = rng.gaussian_matrix(6, 6, 0);
  Matrix expect = Matrix::Zero(6, 6);
  Matrix id3 = Matrix::Identity(3, 3);
  for (const auto& k : kraus) {
    Matrix kj = kron(k, id3);
    expect += kj * x * kj.adjoint();
  }
  CHECK((joint.apply(x) - expect).norm() < 1e-10 * std::max(1.0, expect.norm()));
}

TEST_CASE("tensor_superop on product maps factorizes") {
  LindbladGenerator ga = random_generator(2, 51);
  LindbladGenerator gb = random_generator(3, 52);
  Channel ca = channel_from_generator(ga, 0.3);
  Channel cb = channel_from_generator(gb, 0.7);
  Superoperator joint = tensor_superop(ca.map, cb.map);
  Matrix ra = random_density(2, 53);
  Matrix rb = random_density(3, 54);
  Matrix expect = kron(ca.apply(ra), cb.apply(rb));
  CHECK((joint.apply(kron(ra, rb)) - expect).norm() < 1e-12);
}

TEST_CASE("ancilla stability: CPTP exactly, difference map within 1e-5") {
  LindbladGenerator g = random_generator(2, 61);
  Channel c = channel_from_generator(g, 0.5);
  StabilityReport cptp_rep = stability_check(c.map, 2);
  CHECK(cptp_rep.pass);
  CHECK(cptp_rep.deviation <= 1e-10);

  StabilityReport diff_rep = stability_check(phase_flip_difference(0.25), 2);
  CHECK(diff_rep.pass);
  CHECK(std::abs(diff_rep.base - 0.5) <= 1e-5);
}

TEST_CASE("norm sandwich holds on random Hermiticity-preserving maps") {
  for (std::uint64_t seed : {71ULL, 72ULL, 73ULL}) {
    // Difference of two random CPTP channels: Hermiticity-preserving,
    // generally not CP.
    LindbladGenerator g1 = random_generator(2, seed, 1);
    LindbladGenerator g2 = random_generator(2, seed + 100, 2);
    Channel c1 = channel_from_generator(g1, 0.8);
    Channel c2 = channel_from_generator(g2, 0.8);
    Superoperator diff(2, c1.map.mat - c2.map.mat);
    SandwichReport sw = norm_sandwich_check(diff);
    CHECK(sw.pass);
  }
}

TEST_CASE("triangle inequality via certified bounds") {
  for (std::uint64_t seed : {81ULL, 82ULL}) {
    Superoperator a = phase_flip_difference(0.1 + 0.02 * static_cast<double>(seed % 7));
    LindbladGenerator g1 = random_generator(2, seed, 1);
    LindbladGenerator g2 = random_generator(2, seed + 5, 1);
    Superoperator b(2, channel_from_generator(g1, 0.3).map.mat -
                           channel_from_generator(g2, 0.3).map.mat);
    DiamondResult ra = diamond_norm(a);
    DiamondResult rb = diamond_norm(b);
    DiamondResult rsum = diamond_norm(Superoperator(2, a.mat + b.mat));
    // Certified form: lower(a+b) <= upper(a) + upper(b) + slack.
    CHECK(rsum.lower_bound <= ra.upper_bound + rb.upper_bound + 1e-8);
  }
}

TEST_CASE("submultiplicativity via certified bounds") {
  for (std::uint64_t seed : {91ULL, 92ULL}) {
    LindbladGenerator g1 = random_generator(2, seed, 2);
    LindbladGenerator g2 = random_generator(2, seed + 50, 1);
    Channel c1 = channel_from_generator(g1, 0.4);
    Channel c2 = channel_from_generator(g2, 0.9);
    Superoperator prod = c1.map * c2.map;
    DiamondResult rp = diamond_norm(prod);
    DiamondResult r1 = diamond_norm(c1.map);
    DiamondResult r2 = diamond_norm(c2.map);
    CHECK(rp.lower_bound <= r1.upper_bound * r2.upper_bound + 1e-8);
    // Difference-map products too.
    Superoperator d1 = phase_flip_difference(0.2);
    Superoperator comp(2, d1.mat * c2.map.mat);
    CHECK(diamond_norm(comp).lower_bound <=
          diamond_norm(d1).upper_bound * r2.upper_bound + 1e-8);
  }
}

TEST_CASE("distinguishability semantics: purified optimizer attains the value") {
  // For the difference of two CPTP channels, the purification of the SDP's
  // input state achieves trace distance >= value - 1e-5 on the doubled space.
  LindbladGenerator g1 = random_generator(2, 95, 1);
  LindbladGenerator g2 = random_generator(2, 96, 1);
  Channel c1 = channel_from_generator(g1, 0.6);
  Channel c2 = channel_from_generator(g2, 0.6);
  Superoperator diff(2, c1.map.mat - c2.map.mat);
  DiamondResult r = diamond_norm(diff);

  // psi = (I (x) sqrt(sigma)) Omega; ||(Delta (x) id)(psi psi^dag)||_1.
  const int d = 2;
  Matrix sq = psd_sqrt(r.input_state);
  Vector omega = Vector::Zero(d * d);
  for (int i = 0; i < d; ++i) omega(i * d + i) = 1.0;
  Vector psi = kron(Matrix::Identity(d, d), sq) * omega;
  Superoperator joint = tensor_with_identity(diff, d);
  const double achieved = trace_norm(joint.apply((psi * psi.adjoint()).eval()));
  CHECK(achieved >= r.value - 1e-5);
}
