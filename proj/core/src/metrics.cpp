#include "apq/metrics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "apq/linalg.hpp"
#include "apq/operators.hpp"
#include "apq/rng.hpp"

namespace apq {

std::string to_string(NormKind k) {
  return k == NormKind::induced ? "induced" : "diamond";
}

std::string to_string(DiamondMethod m) {
  return m == DiamondMethod::sdp_converged ? "sdp-converged" : "bound-sandwich";
}

namespace {

// (I (x) A) J (I (x) A^dag) for A acting on the second (input) factor.
Matrix conjugate_input_factor(const Matrix& j, const Matrix& a, int d) {
  Matrix op = kron(Matrix::Identity(d, d), a);
  return op * j * op.adjoint();
}

// Splits a Hermitian matrix into PSD parts m = p - n.
void jordan_split(const Matrix& m, Matrix& p, Matrix& n) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  RealVector pos = es.eigenvalues().cwiseMax(0.0);
  RealVector neg = (-es.eigenvalues()).cwiseMax(0.0);
  p = es.eigenvectors() * pos.asDiagonal() * es.eigenvectors().adjoint();
  n = es.eigenvectors() * neg.asDiagonal() * es.eigenvectors().adjoint();
}

double lambda_max(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm_part(h));
  return es.eigenvalues().maxCoeff();
}

// Hermitian absolute value via eigendecomposition.
Matrix herm_abs(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm_part(h));
  return es.eigenvectors() * es.eigenvalues().cwiseAbs().asDiagonal() *
         es.eigenvectors().adjoint();
}

Matrix inverse_sqrt_psd(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm_part(h));
  RealVector lam = es.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    lam(i) = lam(i) > 0.0 ? 1.0 / std::sqrt(lam(i)) : 0.0;
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

// Primal value ||(I (x) sqrt(sigma)) J (I (x) sqrt(sigma))||_1 — a certified
// lower bound for any density sigma.
double primal_value(const Matrix& j, const Matrix& sigma, int d) {
  Matrix m = conjugate_input_factor(j, psd_sqrt(sigma), d);
  return trace_norm(m);
}

// Dual certificate from a strictly positive sigma:
//   Y+- = (I (x) sigma^{-1/2}) M+- (I (x) sigma^{-1/2}),
// with M = (I (x) sqrt(sigma)) J (I (x) sqrt(sigma)) = M+ - M-.
// Then Y+ - Y- = J exactly and Y+- >= 0, so lambda_max(tr_out(Y+ + Y-))
// upper-bounds the diamond norm.
double dual_upper_from_sigma(const Matrix& j, const Matrix& sigma, int d) {
  Matrix m = conjugate_input_factor(j, psd_sqrt(sigma), d);
  Matrix y_sum = conjugate_input_factor(herm_abs(m), inverse_sqrt_psd(sigma), d);
  return lambda_max(partial_trace(y_sum, d, d, 0));
}

} // namespace

Superoperator tensor_superop(const Superoperator& a, const Superoperator& b) {
  const int da = a.dim, db = b.dim;
  const int dj = da * db;
  if (dj > diamond_dim_cap)
    throw std::invalid_argument("tensor_superop: joint dimension exceeds cap");
  const Eigen::Index n = static_cast<Eigen::Index>(dj) * dj;
  Matrix s = Matrix::Zero(n, n);
  // Joint vec index for entry ((iA,iB),(jA,jB)) of X on H_A (x) H_B is
  // (jA db + jB) dj + (iA db + iB); the factor superoperators act on the
  // (i*, j*) pairs independently.
  auto joint = [&](int ia, int ib, int ja, int jb) -> Eigen::Index {
    return static_cast<Eigen::Index>(ja * db + jb) * dj + (ia * db + ib);
  };
  for (int ia = 0; ia < da; ++ia)
    for (int ja = 0; ja < da; ++ja)
      for (int ib = 0; ib < db; ++ib)
        for (int jb = 0; jb < db; ++jb) {
          const Eigen::Index row = joint(ia, ib, ja, jb);
          for (int ka = 0; ka < da; ++ka)
            for (int la = 0; la < da; ++la) {
              const Complex va = a.mat(ja * da + ia, la * da + ka);
              if (va == Complex(0.0, 0.0)) continue;
              for (int kb = 0; kb < db; ++kb)
                for (int lb = 0; lb < db; ++lb) {
                  const Complex vb = b.mat(jb * db + ib, lb * db + kb);
                  if (vb == Complex(0.0, 0.0)) continue;
                  s(row, joint(ka, kb, la, lb)) += va * vb;
                }
            }
        }
  return Superoperator(dj, std::move(s));
}

Superoperator tensor_with_identity(const Superoperator& s, int n) {
  return tensor_superop(s, Superoperator::identity(n));
}

DiamondResult diamond_norm(const Superoperator& s) {
  const int d = s.dim;
  DiamondResult res;
  res.input_state = maximally_mixed(d);

  // Degenerate map short-circuit.
  if (s.mat.norm() <= 1e-14) {
    res.method = DiamondMethod::sdp_converged;
    return res;
  }

  Matrix j = choi(s);
  const double jnorm = j.norm();
  const bool hermiticity_preserving = (j - j.adjoint()).norm() <= 1e-10 * std::max(1.0, jnorm);

  if (!hermiticity_preserving) {
    // Norm-sandwich fallback: induced <= diamond <= d * induced.
    const double ind = induced_trace_norm(s).value;
    res.lower_bound = ind;
    res.upper_bound = d * ind;
    res.value = ind;
    res.duality_gap = res.upper_bound - res.lower_bound;
    res.method = DiamondMethod::bound_sandwich;
    return res;
  }

  j = herm_part(j);

  // Completely positive fast path: diamond = ||Phi^*(I)||_inf = lambda_max(tr_out J).
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(j);
    if (es.eigenvalues().minCoeff() >= -1e-12 * std::max(1.0, jnorm)) {
      res.value = lambda_max(partial_trace(j, d, d, 0));
      res.lower_bound = res.value;
      res.upper_bound = res.value;
      res.duality_gap = 0.0;
      res.method = DiamondMethod::sdp_converged;
      // Optimizing input: top eigenvector of tr_out J.
      Eigen::SelfAdjointEigenSolver<Matrix> tr_es(herm_part(partial_trace(j, d, d, 0)));
      Eigen::Index top;
      tr_es.eigenvalues().maxCoeff(&top);
      Vector v = tr_es.eigenvectors().col(top);
      res.input_state = v * v.adjoint();
      return res;
    }
  }

  // Fixed-point iteration on the input state:
  //   sigma <- normalize(tr_out | (I (x) sqrt(sigma)) J (I (x) sqrt(sigma)) |).
  Matrix sigma = maximally_mixed(d);
  Matrix best_sigma = sigma;
  double best_lower = primal_value(j, sigma, d);
  int it = 0;
  bool stationary = false;
  for (; it < diamond_iteration_cap; ++it) {
    Matrix m = conjugate_input_factor(j, psd_sqrt(sigma), d);
    Matrix next = partial_trace(herm_abs(m), d, d, 0);
    const double tr = next.trace().real();
    if (tr <= 1e-300) break;
    next /= tr;
    const double step = trace_norm((next - sigma).eval());
    const double lower = primal_value(j, next, d);
    if (lower > best_lower) {
      best_lower = lower;
      best_sigma = next;
      sigma = next;
    } else {
      // Damped step to avoid oscillation; keep the best certified point.
      sigma = (0.5 * (sigma + next)).eval();
    }
    if (step <= diamond_kkt_tol * 1e-2) { stationary = true; break; }
  }
  res.iterations = it;

  // Upper bound candidates: the plain |J| certificate and sigma-based dual
  // certificates at several regularizations.
  double upper = lambda_max(partial_trace(herm_abs(j), d, d, 0));
  for (double delta : {1e-6, 1e-9, 1e-12}) {
    Matrix sigma_reg = ((1.0 - delta) * best_sigma + delta * maximally_mixed(d)).eval();
    upper = std::min(upper, dual_upper_from_sigma(j, sigma_reg, d));
  }
  upper = std::max(upper, best_lower);  // clamp roundoff inversions

  res.lower_bound = best_lower;
  res.upper_bound = upper;
  res.duality_gap = upper - best_lower;
  res.input_state = best_sigma;

  const bool converged =
      stationary && res.duality_gap <= 1e-6 * std::max(1.0, best_lower);
  if (converged) {
    res.method = DiamondMethod::sdp_converged;
    res.value = 0.5 * (res.lower_bound + res.upper_bound);
  } else {
    res.method = DiamondMethod::bound_sandwich;
    res.value = res.lower_bound;
  }
  return res;
}

DiamondResult diamond_distance(const Channel& a, const Channel& b) {
  return diamond_distance(a.map, b.map);
}

DiamondResult diamond_distance(const Superoperator& a, const Superoperator& b) {
  if (a.dim != b.dim) throw std::invalid_argument("diamond_distance: dimension mismatch");
  return diamond_norm(Superoperator(a.dim, a.mat - b.mat));
}

double diamond_lower_pure_ascent(const Superoperator& s, int restarts,
                                 std::uint64_t seed) {
  const int d = s.dim;
  Superoperator joint = tensor_with_identity(s, d);
  const int dj = joint.dim;
  CounterRng rng{seed, 0x9A7CULL};

  double best = 0.0;
  for (int start = 0; start < restarts; ++start) {
    Vector psi;
    if (start == 0) {
      // Maximally entangled start.
      psi = Vector::Zero(dj);
      for (int i = 0; i < d; ++i) psi(i * d + i) = 1.0 / std::sqrt(static_cast<double>(d));
    } else {
      psi = rng.gaussian_vector(dj, static_cast<std::uint64_t>(start));
      psi.normalize();
    }
    double value = 0.0;
    for (int iter = 0; iter < 300; ++iter) {
      Matrix out = joint.apply((psi * psi.adjoint()).eval());
      Eigen::SelfAdjointEigenSolver<Matrix> es(herm_part(out));
      const double cur = es.eigenvalues().cwiseAbs().sum();
      // Dual sign operator G = sum sign(lambda_i) u_i u_i^dag.
      RealVector sgn(es.eigenvalues().size());
      for (Eigen::Index i = 0; i < sgn.size(); ++i)
        sgn(i) = es.eigenvalues()(i) >= 0.0 ? 1.0 : -1.0;
      Matrix g = es.eigenvectors() * sgn.asDiagonal() * es.eigenvectors().adjoint();
      // Ascent on psi: top eigenvector of the Hermitian back-map Phi^*(G).
      Matrix back = unvec((joint.mat.adjoint() * vec(g)).eval(), dj, dj);
      Eigen::SelfAdjointEigenSolver<Matrix> bes(herm_part(back));
      Eigen::Index top;
      bes.eigenvalues().maxCoeff(&top);
      psi = bes.eigenvectors().col(top);
      if (cur <= value * (1.0 + 1e-12)) { value = std::max(value, cur); break; }
      value = cur;
    }
    best = std::max(best, value);
  }
  return best;
}

SandwichReport norm_sandwich_check(const Superoperator& s) {
  SandwichReport rep;
  rep.induced = induced_trace_norm(s).value;
  DiamondResult dn = diamond_norm(s);
  rep.diamond = dn.value;
  rep.d_times_induced = s.dim * rep.induced;
  const double slack = 1e-8 + dn.duality_gap;
  rep.pass = (rep.induced <= rep.diamond + slack) &&
             (rep.diamond <= rep.d_times_induced + slack);
  return rep;
}

StabilityReport stability_check(const Superoperator& s, int n) {
  StabilityReport rep;
  rep.base = diamond_norm(s).value;
  rep.enlarged = diamond_norm(tensor_with_identity(s, n)).value;
  rep.deviation = std::abs(rep.base - rep.enlarged);
  rep.pass = rep.deviation <= 1e-5;
  return rep;
}

} // namespace apq
