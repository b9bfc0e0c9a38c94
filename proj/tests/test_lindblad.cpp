#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "apq/lindblad.hpp"
#include "apq/linalg.hpp"
#include "apq/matrix_io.hpp"
#include "apq/operators.hpp"
#include "support/oracles.hpp"

using namespace apq;
using namespace apq::testing;

namespace {

std::vector<double> sorted_real_parts(const Vector& v) {
  std::vector<double> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = v(i).real();
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

TEST_CASE("trivial generator is the zero superoperator") {
  LindbladGenerator g = build_generator(Matrix::Zero(2, 2), {});
  CHECK(g.superop.mat.norm() == 0.0);
}

TEST_CASE("pure-decay generator matches hand-computed 4x4 matrix (frozen)") {
  const double kappa = 2.0;
  Matrix a = annihilation(2);
  LindbladGenerator g = build_generator(Matrix::Zero(2, 2),
                                        {std::sqrt(kappa) * a});
  // Basis order of vec: (0,0), (1,0), (0,1), (1,1).  Populations relax at 0
  // and -kappa, coherences at -kappa/2, feeding |1><1| into |0><0|.
  Matrix expect = Matrix::Zero(4, 4);
  expect(0, 3) = kappa;
  expect(1, 1) = -kappa / 2;
  expect(2, 2) = -kappa / 2;
  expect(3, 3) = -kappa;
  CHECK((g.superop.mat - expect).norm() < 1e-14);

  EigResult eig = eig_general(g.superop.mat);
  auto re = sorted_real_parts(eig.eigenvalues);
  CHECK(re[0] == doctest::Approx(-kappa).epsilon(1e-12));
  CHECK(re[1] == doctest::Approx(-kappa / 2).epsilon(1e-12));
  CHECK(re[2] == doctest::Approx(-kappa / 2).epsilon(1e-12));
  CHECK(std::abs(re[3]) < 1e-12);
}

TEST_CASE("pure Hamiltonian generator has spectrum {0, 0, +i w, -i w}") {
  const double w = 1.7;
  LindbladGenerator g = build_generator((w / 2.0) * sigma_z(), {});
  EigResult eig = eig_general(g.superop.mat);
  std::vector<double> im(4);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(eig.eigenvalues(i).real()) < 1e-13);
    im[static_cast<std::size_t>(i)] = eig.eigenvalues(i).imag();
  }
  std::sort(im.begin(), im.end());
  CHECK(im[0] == doctest::Approx(-w).epsilon(1e-12));
  CHECK(std::abs(im[1]) < 1e-13);
  CHECK(std::abs(im[2]) < 1e-13);
  CHECK(im[3] == doctest::Approx(w).epsilon(1e-12));
}

TEST_CASE("vectorized generator agrees with direct GKSL evaluation") {
  const int d = 4;
  Matrix h = random_hermitian(d, 31);
  CounterRng rng{32, 1};
  std::vector<Matrix> jumps{rng.gaussian_matrix(d, d, 0), rng.gaussian_matrix(d, d, 1)};
  LindbladGenerator g = build_generator(h, jumps);
  for (std::uint64_t s = 0; s < 5; ++s) {
    Matrix rho = random_density(d, 33, s);
    Matrix via_superop = g.superop.apply(rho);
    Matrix direct = gksl_apply(h, jumps, rho);
    CHECK((via_superop - direct).norm() < 1e-12 * std::max(1.0, direct.norm()));
  }
}

TEST_CASE("generator invariants: trace annihilation and left-half-plane spectrum") {
  LindbladGenerator g = random_generator(3, 77, 2);
  Vector vid = vec(Matrix::Identity(3, 3));
  CHECK((vid.adjoint() * g.superop.mat).norm() < 1e-12 * one_norm(g.superop.mat));
  EigResult eig = eig_general(g.superop.mat);
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i)
    CHECK(eig.eigenvalues(i).real() <= 1e-10);
}

TEST_CASE("non-Hermitian Hamiltonian is rejected") {
  Matrix h(2, 2);
  h << 0, 1, 0, 0;
  CHECK_THROWS(build_generator(h, {}));
}

TEST_CASE("channel at t = 0 is the identity") {
  LindbladGenerator g = random_generator(3, 5);
  Channel c = channel_from_generator(g, 0.0);
  CHECK((c.map.mat - Matrix::Identity(9, 9)).norm() < 1e-14);
  CHECK(c.kind == ChannelKind::cptp);
}

TEST_CASE("semigroup law holds to 1e-10") {
  LindbladGenerator g = random_generator(3, 8, 2);
  Channel c1 = channel_from_generator(g, 0.31);
  Channel c2 = channel_from_generator(g, 0.55);
  Channel c12 = channel_from_generator(g, 0.86);
  CHECK((compose(c1, c2).map.mat - c12.map.mat).norm() < 1e-10);
}

TEST_CASE("cavity decay relaxes every state to vacuum at t = 50/kappa") {
  const double kappa = 3.0;
  const int n = 4;  // Fock cutoff 3
  LindbladGenerator g = build_generator(Matrix::Zero(n, n),
                                        {std::sqrt(kappa) * annihilation(n)});
  Channel c = channel_from_generator(g, 50.0 / kappa);
  Matrix vac = ketbra(n, 0, 0);
  for (std::uint64_t s = 0; s < 5; ++s) {
    Matrix rho = random_density(n, 99, s);
    CHECK(trace_distance(c.apply(rho), vac) <= 1e-10);
  }
}

TEST_CASE("choi of the identity channel is the maximally entangled projector (frozen)") {
  Superoperator id = Superoperator::identity(2);
  Matrix j = choi(id);
  Matrix expect = Matrix::Zero(4, 4);
  // sum_ij |ii><jj| : support on joint indices {0, 3}.
  expect(0, 0) = expect(0, 3) = expect(3, 0) = expect(3, 3) = 1.0;
  CHECK((j - expect).norm() < 1e-15);
  CHECK(std::abs(j.trace().real() - 2.0) < 1e-15);
}

TEST_CASE("choi of the completely depolarizing channel is I4/2 (frozen)") {
  Matrix id2 = Matrix::Identity(2, 2);
  Matrix s = vec((0.5 * id2).eval()) * vec(id2).transpose();
  Matrix j = choi(Superoperator(2, s));
  CHECK((j - 0.5 * Matrix::Identity(4, 4)).norm() < 1e-15);
}

TEST_CASE("choi trace equals d for CPTP channels and reshuffle round-trips") {
  LindbladGenerator g = random_generator(3, 13, 2);
  Channel c = channel_from_generator(g, 0.4);
  Matrix j = choi(c);
  CHECK(std::abs(j.trace().real() - 3.0) < 1e-12);
  CHECK(std::abs(j.trace().imag()) < 1e-13);
  Superoperator back = superop_from_choi(j, 3);
  CHECK((back.mat - c.map.mat).norm() < 1e-14);
}

TEST_CASE("kraus of identity channel is a single unitary phase of I") {
  auto kraus = kraus_from_choi(choi(Superoperator::identity(2)), 2);
  REQUIRE(kraus.size() == 1);
  // K = c I with |c| = 1.
  Matrix k = kraus[0];
  CHECK(std::abs(std::abs(k(0, 0)) - 1.0) < 1e-12);
  CHECK((k - k(0, 0) * Matrix::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("amplitude damping channel: closed form, kraus, stinespring") {
  const double kappa = 1.3, t = 0.45;
  const double p = 1.0 - std::exp(-kappa * t);
  LindbladGenerator g = build_generator(Matrix::Zero(2, 2),
                                        {std::sqrt(kappa) * annihilation(2)});
  Channel c = channel_from_generator(g, t);

  // Closed form: rho00 -> rho00 + p rho11, coherences scale by sqrt(1-p).
  Matrix rho = random_density(2, 55);
  Matrix out = c.apply(rho);
  CHECK(std::abs(out(0, 0) - (rho(0, 0) + p * rho(1, 1))) < 1e-12);
  CHECK(std::abs(out(1, 1) - (1.0 - p) * rho(1, 1)) < 1e-12);
  CHECK(std::abs(out(0, 1) - std::sqrt(1.0 - p) * rho(0, 1)) < 1e-12);

  auto kraus = kraus_from_choi(choi(c), 2);
  REQUIRE(kraus.size() == 2);
  Matrix completeness = Matrix::Zero(2, 2);
  for (const auto& k : kraus) completeness += k.adjoint() * k;
  CHECK((completeness - Matrix::Identity(2, 2)).norm() < 1e-8);
  CHECK((apply_kraus(kraus, rho) - out).norm() < 1e-10);

  // The canonical damping pair is recovered up to basis mixing; compare the
  // singular-value content: one Kraus op has singular values {1, sqrt(1-p)},
  // the other {sqrt(p), 0}.
  std::vector<double> svs;
  for (const auto& k : kraus) {
    auto s = k.jacobiSvd().singularValues();
    svs.push_back(s(0));
    svs.push_back(s(1));
  }
  std::sort(svs.begin(), svs.end());
  std::vector<double> expect{0.0, std::sqrt(p), std::sqrt(1.0 - p), 1.0};
  std::sort(expect.begin(), expect.end());
  for (int i = 0; i < 4; ++i)
    CHECK(svs[static_cast<std::size_t>(i)] ==
          doctest::Approx(expect[static_cast<std::size_t>(i)]).epsilon(1e-9));

  Matrix v = stinespring_isometry(kraus);
  CHECK(v.rows() == 4);
  CHECK(v.cols() == 2);
  CHECK((v.adjoint() * v - Matrix::Identity(2, 2)).norm() < 1e-8);
  CHECK((apply_stinespring(v, rho) - out).norm() < 1e-10);
}

TEST_CASE("stinespring of a single identity Kraus is the identity") {
  std::vector<Matrix> kraus{Matrix::Identity(3, 3)};
  Matrix v = stinespring_isometry(kraus);
  CHECK((v - Matrix::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("kraus completeness holds on random CPTP channels") {
  for (std::uint64_t seed : {101ULL, 102ULL, 103ULL}) {
    LindbladGenerator g = random_generator(3, seed, 2);
    Channel c = channel_from_generator(g, 0.7);
    auto kraus = kraus_from_choi(choi(c), 3);
    CHECK(kraus.size() <= 9);
    Matrix completeness = Matrix::Zero(3, 3);
    for (const auto& k : kraus) completeness += k.adjoint() * k;
    CHECK((completeness - Matrix::Identity(3, 3)).norm() < 1e-8);
    Matrix rho = random_density(3, seed + 1000);
    CHECK((apply_kraus(kraus, rho) - c.apply(rho)).norm() < 1e-9);
  }
}

TEST_CASE("verify_cptp classifies the transpose map as HP, TP, not CP") {
  Matrix swap = Matrix::Zero(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      swap(i + 2 * j, j + 2 * i) = 1.0;
  CptpReport rep = verify_cptp(Superoperator(2, swap));
  CHECK(rep.hermiticity_preserving);
  CHECK_FALSE(rep.cp);
  CHECK(rep.tp_residual < 1e-12);
  // Choi of transpose is the SWAP operator: eigenvalue -1, normalized -1/2.
  CHECK(rep.min_choi_eig == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(rep.kind() == ChannelKind::hermiticity_preserving);
}

TEST_CASE("choi PSD for t in {0.1, 1, 10}/||L||") {
  LindbladGenerator g = random_generator(3, 201, 2);
  const double scale = one_norm(g.superop.mat);
  for (double t : {0.1 / scale, 1.0 / scale, 10.0 / scale}) {
    Channel c = channel_from_generator(g, t);
    CptpReport rep = verify_cptp(c.map);
    CHECK(rep.cp);
    CHECK(rep.min_choi_eig >= -1e-10);
  }
}

TEST_CASE("unital dephasing decreases purity along trajectories") {
  // sigma_z jump: unital generator, steady state I/2.
  LindbladGenerator g = build_generator(Matrix::Zero(2, 2), {0.7 * sigma_z()});
  for (std::uint64_t s = 0; s < 5; ++s) {
    Vector psi = random_pure(2, 300, s);
    Matrix rho = psi * psi.adjoint();
    // d/dt tr[rho^2] = 2 Re tr[rho L(rho)] must be <= 0 for unital flows.
    const double deriv = 2.0 * (rho * g.superop.apply(rho)).trace().real();
    CHECK(deriv <= 1e-10);
    Channel c = channel_from_generator(g, 0.5);
    Matrix rho1 = c.apply(rho);
    CHECK((rho1 * rho1).trace().real() <= (rho * rho).trace().real() + 1e-10);
  }
}

TEST_CASE("matrix json schema round-trips") {
  CounterRng rng{44, 2};
  Matrix m = rng.gaussian_matrix(3, 5, 0);
  nlohmann::json j = matrix_to_json(m);
  CHECK(j["rows"] == 3);
  CHECK(j["cols"] == 5);
  Matrix back = matrix_from_json(j);
  CHECK((m - back).norm() == 0.0);
}

TEST_CASE("atomic file write creates the file with exact content") {
  const std::string path = "apq_test_atomic.txt";
  atomic_write_file(path, "hello\n1.5\n");
  CHECK(read_file(path) == "hello\n1.5\n");
  std::remove(path.c_str());
}

TEST_CASE("partial trace contracts the correct factor") {
  Matrix a = random_density(2, 61);
  Matrix b = random_density(3, 62);
  Matrix joint = kron(a, b);
  CHECK((partial_trace(joint, 2, 3, 0) - b).norm() < 1e-13);
  CHECK((partial_trace(joint, 2, 3, 1) - a).norm() < 1e-13);
  CHECK(std::abs(partial_trace(joint, 2, 3, 1).trace().real() - 1.0) < 1e-13);
}
