#include "apq/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "apq/fit.hpp"
#include "apq/linalg.hpp"
#include "apq/operators.hpp"

namespace apq {

SpectralData analyze(const Superoperator& s) {
  SpectralData sd;
  sd.dim = s.dim;
  sd.generator = s;
  sd.tol_zero = std::max(1e-10, 1e-12 * s.mat.norm());

  EigResult eig = eig_general(s.mat);
  sd.eigenvalues = eig.eigenvalues;
  sd.eigen_condition = eig.cond;
  sd.diagonalizable = eig.diagonalizable;

  const Eigen::Index n = eig.eigenvalues.size();
  std::vector<Eigen::Index> kernel, rest;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (std::abs(eig.eigenvalues(k)) < sd.tol_zero) kernel.push_back(k);
    else rest.push_back(k);
  }
  sd.kernel_dim = static_cast<int>(kernel.size());
  if (sd.kernel_dim == 0)
    throw std::runtime_error("analyze: empty kernel — input is not a Lindbladian "
                             "within tolerance");

  sd.gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index k : rest) sd.gap = std::min(sd.gap, std::abs(eig.eigenvalues(k).real()));
  if (rest.empty()) sd.gap = 0.0;

  // Spectral projector P = sum_{k in kernel} v_k w_k^dag and Drazin inverse
  // from the biorthogonal system (left = rows of V^{-1}).
  Matrix p = Matrix::Zero(n, n);
  for (Eigen::Index k : kernel) p += eig.right.col(k) * eig.left.row(k);
  Matrix dz = Matrix::Zero(n, n);
  for (Eigen::Index k : rest)
    dz += (1.0 / eig.eigenvalues(k)) * (eig.right.col(k) * eig.left.row(k));

  sd.projection = Superoperator(s.dim, std::move(p));
  sd.drazin = Superoperator(s.dim, std::move(dz));

  // Steady state as the normalized projection of the maximally mixed state;
  // for kernel_dim = 1 this is the unique fixed density operator.
  Matrix rho = sd.projection.apply(maximally_mixed(s.dim));
  rho = herm_part(rho);
  const double tr = rho.trace().real();
  if (std::abs(tr) > 1e-14) rho /= tr;
  sd.steady_state = rho;

  Eigen::SelfAdjointEigenSolver<Matrix> es(sd.steady_state);
  const double min_eig = es.eigenvalues().minCoeff();
  sd.gapped_unique = (sd.kernel_dim == 1) && (sd.gap > 0.0) && std::isfinite(sd.gap);
  sd.primitive = sd.gapped_unique && min_eig > 1e-12;
  return sd;
}

namespace {

// Composite-Simpson quadrature of f(t) = exp(tL) M over [0, T] with 2*panels
// intervals, evaluating exp at the base step only and accumulating powers.
Matrix simpson_semigroup(const Matrix& l, const Matrix& m, double T, int panels) {
  const int n = 2 * panels;  // even interval count
  const double h = T / n;
  Matrix step = expm(l, h);
  Matrix cur = m;  // exp(0) M
  Matrix acc = cur;
  for (int k = 1; k <= n; ++k) {
    cur = (step * cur).eval();
    const double w = (k == n) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    acc += w * cur;
  }
  return (h / 3.0) * acc;
}

} // namespace

DrazinReport drazin_check(const SpectralData& sd) {
  DrazinReport rep;
  if (sd.gap <= 0.0 || !std::isfinite(sd.gap))
    throw std::invalid_argument("drazin_check: positive spectral gap required");
  const Eigen::Index n = sd.generator.mat.rows();
  const Matrix m = Matrix::Identity(n, n) - sd.projection.mat;
  const double t_cut = 40.0 / sd.gap;

  Matrix prev = -simpson_semigroup(sd.generator.mat, m, t_cut, 64);
  double rel = std::numeric_limits<double>::infinity();
  Matrix quad = prev;
  for (int panels = 128; panels <= 8192; panels *= 2) {
    quad = -simpson_semigroup(sd.generator.mat, m, t_cut, panels);
    rel = (quad - prev).norm() / std::max(1e-300, quad.norm());
    prev = quad;
    if (rel < 1e-8) break;
  }
  rep.converged = rel < 1e-7;
  rep.quad_rel_error = (quad - sd.drazin.mat).norm() / std::max(1e-300, sd.drazin.mat.norm());
  rep.drazin_norm = induced_trace_norm(sd.drazin).value;
  rep.ratio = rep.drazin_norm * sd.gap;
  rep.ratio_spectral = op_norm(sd.drazin.mat) * sd.gap;
  return rep;
}

PrimitivityReport primitivity_test(const LindbladGenerator& g) {
  SpectralData sd = analyze(g);
  PrimitivityReport rep;
  rep.kernel_dim = sd.kernel_dim;
  rep.gapped_unique = sd.gapped_unique;
  Eigen::SelfAdjointEigenSolver<Matrix> es(sd.steady_state);
  rep.steady_min_eig = es.eigenvalues().minCoeff();

  if (sd.gap <= 0.0 || !std::isfinite(sd.gap)) {
    rep.min_output_eig = 0.0;
    rep.primitive = false;
    return rep;
  }

  // Relaxation of a d^2 tomography basis at t0 = 10/gap: all outputs must be
  // full rank for primitivity.
  const int d = g.dim;
  const double t0 = 10.0 / sd.gap;
  const Matrix u = expm(g.superop.mat, t0);
  double min_out = std::numeric_limits<double>::infinity();
  auto probe = [&](const Vector& psi) {
    Matrix rho = psi * psi.adjoint();
    rho /= rho.trace();
    Matrix out = herm_part(unvec((u * vec(rho)).eval(), d, d));
    Eigen::SelfAdjointEigenSolver<Matrix> oes(out);
    min_out = std::min(min_out, oes.eigenvalues().minCoeff());
  };
  for (int i = 0; i < d; ++i) probe(ket(d, i));
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      probe((ket(d, i) + ket(d, j)) / std::sqrt(2.0));
      probe((ket(d, i) + I_UNIT * ket(d, j)) / std::sqrt(2.0));
    }
  rep.min_output_eig = min_out;
  rep.primitive = sd.kernel_dim == 1 && rep.steady_min_eig > 1e-12 && min_out > 1e-12;
  return rep;
}

DecayFit decay_rate_fit(const LindbladGenerator& g, NormKind norm) {
  SpectralData sd = analyze(g);
  if (sd.kernel_dim != 1)
    throw std::invalid_argument("decay_rate_fit: unique steady state required");
  if (sd.gap <= 0.0) throw std::invalid_argument("decay_rate_fit: positive gap required");

  std::vector<double> ts, vals;
  for (int k = 1; k <= 20; ++k) {
    const double t = static_cast<double>(k) / sd.gap;
    Superoperator diff(g.dim, expm(g.superop.mat, t) - sd.projection.mat);
    const double v = (norm == NormKind::induced) ? induced_trace_norm(diff).value
                                                 : diamond_norm(diff).value;
    if (v >= 1e-13) {
      ts.push_back(t);
      vals.push_back(v);
    }
  }
  LineFit f = fit_line(ts, [&] {
    std::vector<double> logs;
    logs.reserve(vals.size());
    for (double v : vals) logs.push_back(std::log(v));
    return logs;
  }());
  DecayFit fit;
  fit.rate = -f.slope;
  fit.prefactor = std::exp(f.intercept);
  fit.r_squared = f.r_squared;
  fit.points_used = static_cast<int>(ts.size());
  return fit;
}

ResolventReport resolvent_check(const SpectralData& sd) {
  if (sd.gap <= 0.0 || !std::isfinite(sd.gap))
    throw std::invalid_argument("resolvent_check: positive spectral gap required");
  const Eigen::Index n = sd.generator.mat.rows();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix q = id - sd.projection.mat;  // I - P
  ResolventReport rep;
  for (double frac : {-0.4, -0.2, 0.0, 0.2, 0.4}) {
    const double zeta = frac * sd.gap;
    // (zeta - L)^{-1} (I - P) = (zeta I - L + P)^{-1} (I - P): adding P makes
    // the operator invertible on ran P (acting there as zeta + 1) without
    // touching the complement.
    Matrix shifted = zeta * id - sd.generator.mat + sd.projection.mat;
    Matrix resolvent = Eigen::PartialPivLU<Matrix>(shifted).solve(q);
    const double norm = induced_trace_norm(Superoperator(sd.dim, resolvent)).value;
    rep.k_measured = std::max(rep.k_measured, norm * (sd.gap - std::abs(zeta)));
  }
  rep.pass = rep.k_measured <= 10.0;
  return rep;
}

double ergodic_average_residual(const SpectralData& sd) {
  if (sd.gap <= 0.0 || !std::isfinite(sd.gap))
    throw std::invalid_argument("ergodic_average_residual: positive gap required");
  const Eigen::Index n = sd.generator.mat.rows();
  const double T = 1e3 / sd.gap;
  Matrix avg = simpson_semigroup(sd.generator.mat, Matrix::Identity(n, n), T, 4096) / T;
  return (avg - sd.projection.mat).norm();
}

} // namespace apq
