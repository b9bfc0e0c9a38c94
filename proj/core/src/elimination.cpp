#include "apq/elimination.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "apq/linalg.hpp"
#include "apq/metrics.hpp"
#include "apq/operators.hpp"

namespace apq {

namespace {

// Projector onto the support of a PSD matrix (eigenvalues above
// 1e-12 * max(1, lambda_max)).
Matrix support_projector(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm_part(rho));
  const double lmax = es.eigenvalues().maxCoeff();
  const double cut = 1e-12 * std::max(1.0, lmax);
  Matrix proj = Matrix::Zero(rho.rows(), rho.cols());
  for (int i = 0; i < rho.rows(); ++i) {
    if (es.eigenvalues()(i) > cut) {
      proj += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
    }
  }
  return proj;
}

void validate_split(const TensorSplit& split, int dim) {
  if (split.d_fast < 1 || split.d_slow < 1 || split.d_fast * split.d_slow != dim) {
    throw std::invalid_argument("tensor split dimensions do not factor the Hilbert space");
  }
  const auto& rho = split.fast_steady;
  if (rho.rows() != split.d_fast || rho.cols() != split.d_fast) {
    throw std::invalid_argument("fast_steady has wrong dimensions");
  }
  if ((rho - rho.adjoint()).norm() > 1e-10 * std::max(1.0, rho.norm())) {
    throw std::invalid_argument("fast_steady is not Hermitian");
  }
  if (std::abs(rho.trace().real() - 1.0) > 1e-10 || std::abs(rho.trace().imag()) > 1e-10) {
    throw std::invalid_argument("fast_steady is not trace-one");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm_part(rho));
  if (es.eigenvalues().minCoeff() < -1e-10) {
    throw std::invalid_argument("fast_steady is not positive semidefinite");
  }
}

} // namespace

Superoperator StiffGenerator::full() const {
  return Superoperator{fast.dim, fast.superop.mat / epsilon + slow.superop.mat};
}

StiffGenerator make_stiff(const LindbladGenerator& fast, const LindbladGenerator& slow,
                          double epsilon, std::optional<TensorSplit> split,
                          std::optional<Matrix> h_interaction) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("epsilon must be positive");
  }
  if (fast.dim != slow.dim) {
    throw std::invalid_argument("fast and slow parts act on different spaces");
  }
  if (split) {
    validate_split(*split, fast.dim);
  }
  if (h_interaction) {
    if (h_interaction->rows() != fast.dim || h_interaction->cols() != fast.dim) {
      throw std::invalid_argument("interaction Hamiltonian has wrong dimensions");
    }
    if ((*h_interaction - h_interaction->adjoint()).norm() >
        1e-12 * std::max(1.0, h_interaction->norm())) {
      throw std::invalid_argument("interaction Hamiltonian is not Hermitian");
    }
  }

  StiffGenerator sg;
  sg.fast = fast;
  sg.slow = slow;
  sg.epsilon = epsilon;
  sg.split = std::move(split);
  sg.h_interaction = std::move(h_interaction);
  sg.spectral_fast = analyze(fast.superop);

  // The assembled generator must itself be a Lindbladian: trace annihilation
  // and left-half-plane spectrum.
  const Superoperator l = sg.full();
  const int d = fast.dim;
  Vector vec_id = vec(Matrix::Identity(d, d));
  const double scale = std::max(1.0, one_norm(l.mat));
  if ((vec_id.adjoint() * l.mat).norm() > 1e-12 * scale) {
    throw std::invalid_argument("assembled stiff generator does not annihilate the trace");
  }
  Eigen::ComplexEigenSolver<Matrix> es(l.mat, /*computeEigenvectors=*/false);
  if (es.eigenvalues().real().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("assembled stiff generator has spectrum in the right half-plane");
  }
  return sg;
}

StiffGenerator with_epsilon(const StiffGenerator& sg, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("epsilon must be positive");
  }
  StiffGenerator out = sg;
  out.epsilon = epsilon;
  return out;
}

CenteringReport centering_check(const StiffGenerator& sg) {
  const int d = sg.fast.dim;
  const int n = d * d;
  const Matrix& p = sg.spectral_fast.projection.mat;
  const Matrix q = Matrix::Identity(n, n) - p;
  const Matrix& s = sg.slow.superop.mat;

  CenteringReport rep;
  rep.residual = induced_trace_norm(Superoperator{d, p * s * q}).value;
  rep.reverse_residual = induced_trace_norm(Superoperator{d, q * s * p}).value;
  rep.slow_norm = induced_trace_norm(sg.slow.superop).value;
  rep.satisfied = rep.residual <= 1e-10 * rep.slow_norm;

  if (sg.split && sg.h_interaction) {
    const Matrix pi =
        kron(support_projector(sg.split->fast_steady),
             Matrix::Identity(sg.split->d_slow, sg.split->d_slow));
    rep.hamiltonian_residual = op_norm(pi * (*sg.h_interaction) * pi);
  }
  return rep;
}

CptpVerdict cptp_second_order_check(const EffectiveGenerator& eg,
                                    const std::vector<double>& t_samples) {
  CptpVerdict verdict;
  for (double t : t_samples) {
    Matrix map;
    int d = 0;
    if (eg.reduced) {
      d = static_cast<int>(std::llround(std::sqrt(static_cast<double>(eg.reduced->rows()))));
      map = expm((t * (*eg.reduced)).eval());
    } else {
      // Fallback diagnostic on the full space: exp(t*eff) composed with the
      // kernel projector, the map the dynamics-convergence statements use.
      d = eg.dim;
      map = expm((t * eg.eff.mat).eval()) * eg.projection.mat;
    }
    const Matrix j = choi(Superoperator{d, map});
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm_part(j));
    const double neg = std::max(0.0, -es.eigenvalues().minCoeff());
    if (neg > verdict.violation) {
      verdict.violation = neg;
      verdict.worst_t = t;
    }
  }
  verdict.cptp = verdict.violation <= 1e-8;
  return verdict;
}

EffectiveGenerator effective_generator(const StiffGenerator& sg) {
  const int d = sg.fast.dim;
  const int n = d * d;
  const Matrix& p = sg.spectral_fast.projection.mat;
  const Matrix q = Matrix::Identity(n, n) - p;
  const Matrix& s = sg.slow.superop.mat;

  // Drazin inverse of the physical fast part eps^{-1} L_fast: scaling a
  // generator by c scales its Drazin inverse by 1/c.
  const Matrix drazin_phys = sg.epsilon * sg.spectral_fast.drazin.mat;

  EffectiveGenerator eg;
  eg.dim = d;
  eg.epsilon = sg.epsilon;
  eg.projection = sg.spectral_fast.projection;
  eg.first_order = Superoperator{d, p * s * p};
  eg.second_order = Superoperator{d, -(p * s) * drazin_phys * (q * s * p)};
  eg.eff = Superoperator{d, eg.first_order.mat + eg.second_order.mat};

  if (sg.split) {
    const int df = sg.split->d_fast;
    const int ds = sg.split->d_slow;
    Matrix reduced = Matrix::Zero(ds * ds, ds * ds);
    for (int j = 0; j < ds; ++j) {
      for (int i = 0; i < ds; ++i) {
        const Matrix input = kron(sg.split->fast_steady, ketbra(ds, i, j));
        const Matrix out = partial_trace(unvec(eg.eff.mat * vec(input), d), df, ds, 0);
        reduced.col(j * ds + i) = vec(out);
      }
    }
    eg.reduced = std::move(reduced);
  }

  eg.centering = centering_check(sg);

  // Default CPTP sampling at times spread around the generator's own scale.
  const double scale = op_norm(eg.reduced ? *eg.reduced : eg.eff.mat);
  std::vector<double> samples;
  if (scale < 1e-300) {
    samples = {1.0};
  } else {
    samples = {0.1 / scale, 0.3 / scale, 1.0 / scale, 3.0 / scale, 10.0 / scale};
  }
  eg.cptp_verdict = cptp_second_order_check(eg, samples);
  return eg;
}

SchurResult exact_schur(const StiffGenerator& sg, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("epsilon must be positive");
  }
  const int d = sg.fast.dim;
  const int n = d * d;
  const Matrix& f = sg.fast.superop.mat;
  const Matrix& s = sg.slow.superop.mat;

  const double slow_norm = one_norm(s);
  const double macheps = std::numeric_limits<double>::epsilon();
  if (epsilon * sg.spectral_fast.gap < 1e3 * macheps * slow_norm) {
    throw std::domain_error(
        "exact Schur complement refused: eps * gap below the conditioning floor");
  }

  EigResult ed = eig_general(f);
  if (!ed.diagonalizable) {
    throw std::domain_error("exact Schur complement requires a diagonalizable fast part");
  }

  // Order the spectral basis kernel-first.
  const double tol = sg.spectral_fast.tol_zero;
  std::vector<int> order;
  order.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (std::abs(ed.eigenvalues(i)) < tol) order.push_back(i);
  }
  const int k = static_cast<int>(order.size());
  if (k != sg.spectral_fast.kernel_dim) {
    throw std::logic_error("kernel dimension mismatch between analyses");
  }
  for (int i = 0; i < n; ++i) {
    if (std::abs(ed.eigenvalues(i)) >= tol) order.push_back(i);
  }
  Matrix v(n, n), vinv(n, n);
  for (int i = 0; i < n; ++i) {
    v.col(i) = ed.right.col(order[i]);
    vinv.row(i) = ed.left.row(order[i]);
  }

  const int m = n - k;
  const Matrix ltil = vinv * s * v;
  const Matrix ftil = vinv * f * v;
  const Matrix a = ltil.topLeftCorner(k, k);
  const Matrix b = ltil.topRightCorner(k, m);
  const Matrix c = ltil.bottomLeftCorner(m, k);
  const Matrix e = ltil.bottomRightCorner(m, m);
  const Matrix dblock = ftil.bottomRightCorner(m, m);

  const Matrix inv_target = dblock + epsilon * e;
  Eigen::JacobiSVD<Matrix> svd(inv_target);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  SchurResult res;
  res.epsilon = epsilon;
  res.fast_block_condition = (smin > 0.0) ? smax / smin : std::numeric_limits<double>::infinity();

  const Matrix schur_block = a - epsilon * (b * inv_target.partialPivLu().solve(c));
  res.schur = Superoperator{d, v.leftCols(k) * schur_block * vinv.topRows(k)};
  return res;
}

} // namespace apq
