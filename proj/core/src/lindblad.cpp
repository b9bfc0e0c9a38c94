#include "apq/lindblad.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

#include "apq/operators.hpp"

namespace apq {

LindbladGenerator build_generator(const Matrix& h, const std::vector<Matrix>& jumps) {
  if (h.rows() != h.cols()) throw std::invalid_argument("build_generator: H must be square");
  const int d = static_cast<int>(h.rows());
  const double hnorm = h.norm();
  if ((h - h.adjoint()).norm() > 1e-12 * std::max(1.0, hnorm))
    throw std::invalid_argument("build_generator: Hamiltonian not Hermitian within tolerance");
  for (const auto& l : jumps)
    if (l.rows() != d || l.cols() != d)
      throw std::invalid_argument("build_generator: jump operator dimension mismatch");

  const Eigen::Index d2 = static_cast<Eigen::Index>(d) * d;
  const Matrix id = Matrix::Identity(d, d);
  Matrix s = Matrix::Zero(d2, d2);
  s -= I_UNIT * (kron(id, h) - kron(h.transpose(), id));
  for (const auto& l : jumps) {
    const Matrix ldl = (l.adjoint() * l).eval();
    s += kron(l.conjugate(), l);
    s -= 0.5 * kron(id, ldl);
    s -= 0.5 * kron(ldl.transpose(), id);
  }

  LindbladGenerator g;
  g.dim = d;
  g.hamiltonian = h;
  g.jumps = jumps;
  g.superop = Superoperator(d, std::move(s));

  // Trace annihilation: vec(I)^dag L = 0 (trace preservation of the flow).
  Vector vid = vec(id);
  const double tr_residual = (vid.adjoint() * g.superop.mat).norm();
  if (tr_residual > 1e-12 * std::max(1.0, one_norm(g.superop.mat)))
    throw std::runtime_error("build_generator: trace annihilation violated");
  return g;
}

std::string to_string(ChannelKind k) {
  switch (k) {
    case ChannelKind::general_linear: return "general-linear";
    case ChannelKind::hermiticity_preserving: return "hermiticity-preserving";
    case ChannelKind::cp: return "cp";
    case ChannelKind::cptp: return "cptp";
  }
  return "unknown";
}

Channel channel_from_generator(const LindbladGenerator& g, double t) {
  if (t < 0) throw std::invalid_argument("channel_from_generator: t must be >= 0");
  Channel c;
  c.dim = g.dim;
  c.map = Superoperator(g.dim, expm(g.superop.mat, t));
  CptpReport rep = verify_cptp(c.map);
  if (rep.kind() != ChannelKind::cptp)
    throw std::runtime_error(
        "channel_from_generator: exp(tL) failed CPTP verification (generator bug)");
  c.kind = ChannelKind::cptp;
  return c;
}

Channel compose(const Channel& a, const Channel& b) {
  Channel c;
  c.dim = a.dim;
  c.map = a.map * b.map;
  c.kind = (a.kind == ChannelKind::cptp && b.kind == ChannelKind::cptp)
               ? ChannelKind::cptp
               : ChannelKind::general_linear;
  return c;
}

Matrix choi(const Superoperator& s) {
  const int d = s.dim;
  Matrix j(static_cast<Eigen::Index>(d) * d, static_cast<Eigen::Index>(d) * d);
  for (int a = 0; a < d; ++a)
    for (int i = 0; i < d; ++i)
      for (int b = 0; b < d; ++b)
        for (int jj = 0; jj < d; ++jj)
          j(a * d + i, b * d + jj) = s.mat(b * d + a, jj * d + i);
  return j;
}

Superoperator superop_from_choi(const Matrix& j, int d) {
  if (j.rows() != static_cast<Eigen::Index>(d) * d || j.rows() != j.cols())
    throw std::invalid_argument("superop_from_choi: dimension mismatch");
  Matrix s(j.rows(), j.cols());
  for (int a = 0; a < d; ++a)
    for (int i = 0; i < d; ++i)
      for (int b = 0; b < d; ++b)
        for (int jj = 0; jj < d; ++jj)
          s(b * d + a, jj * d + i) = j(a * d + i, b * d + jj);
  return Superoperator(d, std::move(s));
}

std::vector<Matrix> kraus_from_choi(const Matrix& j, int d) {
  if (j.rows() != static_cast<Eigen::Index>(d) * d || j.rows() != j.cols())
    throw std::invalid_argument("kraus_from_choi: dimension mismatch");
  const double jnorm = j.norm();
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm_part(j));
  if (es.info() != Eigen::Success)
    throw std::runtime_error("kraus_from_choi: eigensolver failed");
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -1e-6 * std::max(1.0, jnorm))
    throw std::invalid_argument("kraus_from_choi: Choi matrix materially non-PSD");
  const double cut = 1e-12 * std::max(1.0, std::abs(j.trace().real()));
  std::vector<Matrix> kraus;
  for (Eigen::Index m = 0; m < es.eigenvalues().size(); ++m) {
    const double lam = es.eigenvalues()(m);
    if (lam <= cut) continue;
    const double w = std::sqrt(lam);
    Matrix k(d, d);
    for (int a = 0; a < d; ++a)
      for (int i = 0; i < d; ++i)
        k(a, i) = w * es.eigenvectors()(a * d + i, m);
    kraus.push_back(std::move(k));
  }
  return kraus;
}

Matrix apply_kraus(const std::vector<Matrix>& kraus, const Matrix& rho) {
  if (kraus.empty()) throw std::invalid_argument("apply_kraus: empty Kraus set");
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (const auto& k : kraus) out += k * rho * k.adjoint();
  return out;
}

Matrix stinespring_isometry(const std::vector<Matrix>& kraus) {
  if (kraus.empty()) throw std::invalid_argument("stinespring_isometry: empty Kraus set");
  const Eigen::Index d = kraus.front().rows();
  Matrix completeness = Matrix::Zero(d, d);
  for (const auto& k : kraus) completeness += (k.adjoint() * k).eval();
  if ((completeness - Matrix::Identity(d, d)).norm() > 1e-8)
    throw std::invalid_argument("stinespring_isometry: Kraus set not complete");
  const Eigen::Index m = static_cast<Eigen::Index>(kraus.size());
  Matrix v(d * m, d);
  for (Eigen::Index block = 0; block < m; ++block)
    v.block(block * d, 0, d, d) = kraus[static_cast<std::size_t>(block)];
  return v;
}

Matrix apply_stinespring(const Matrix& v, const Matrix& rho) {
  const Eigen::Index d = v.cols();
  const Eigen::Index m = v.rows() / d;
  Matrix big = v * rho * v.adjoint();
  // Environment is the outer block index: trace over blocks.
  return partial_trace(big, static_cast<int>(m), static_cast<int>(d), 0);
}

CptpReport verify_cptp(const Superoperator& s, double psd_tol) {
  const int d = s.dim;
  CptpReport rep;
  Matrix j = choi(s);
  const double jscale = std::max(1.0, j.norm());
  rep.herm_residual = (j - j.adjoint()).norm() / jscale;
  rep.hermiticity_preserving = rep.herm_residual <= 1e-10;

  Eigen::SelfAdjointEigenSolver<Matrix> es(herm_part(j));
  // Unit-normalized Choi (trace d for TP maps): divide by d.
  rep.min_choi_eig = es.eigenvalues().minCoeff() / static_cast<double>(d);
  rep.cp = rep.hermiticity_preserving && rep.min_choi_eig >= -psd_tol;

  Matrix tr_out = partial_trace(j, d, d, 0);
  rep.tp_residual = (tr_out - Matrix::Identity(d, d)).norm();
  rep.tp = rep.tp_residual <= 1e-10;
  return rep;
}

} // namespace apq
