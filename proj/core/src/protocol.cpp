#include "apq/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>

#include "apq/linalg.hpp"
#include "apq/parallel.hpp"
#include "apq/spectral.hpp"

namespace apq {

std::string to_string(ProtocolMode m) {
  switch (m) {
    case ProtocolMode::standard_trotter: return "standard-trotter";
    case ProtocolMode::layered_analog: return "layered-analog";
    case ProtocolMode::layered_digital: return "layered-digital";
    case ProtocolMode::effective_only: return "effective-only";
  }
  return "unknown";
}

std::string to_string(SlowSource s) {
  switch (s) {
    case SlowSource::full_slow: return "full-slow";
    case SlowSource::effective: return "effective";
  }
  return "unknown";
}

void validate(const ProtocolConfig& cfg) {
  if (cfg.stiff == nullptr) throw std::invalid_argument("protocol config: missing stiff generator");
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("protocol config: dt must be positive");
  if (cfg.total_time < cfg.dt)
    throw std::invalid_argument("protocol config: total_time must be >= dt");
  if (cfg.slow_order != 1 && cfg.slow_order != 2)
    throw std::invalid_argument("protocol config: slow_order must be 1 or 2");
  if (cfg.mode == ProtocolMode::layered_digital) {
    if (!(cfg.fast_substep > 0.0))
      throw std::invalid_argument("protocol config: layered-digital needs fast_substep > 0");
    if (cfg.fast_order < 1)
      throw std::invalid_argument("protocol config: fast_order must be >= 1");
  }
}

long fast_substep_count(const ProtocolConfig& cfg) {
  const double raw = cfg.dt / (cfg.stiff->epsilon * cfg.fast_substep);
  long n = static_cast<long>(std::ceil(raw - 1e-9));
  return n < 1 ? 1 : n;
}

namespace {

Matrix mat_pow(const Matrix& base, long n) {
  Matrix result = Matrix::Identity(base.rows(), base.cols());
  Matrix sq = base;
  long k = n;
  while (k > 0) {
    if (k & 1) result = result * sq;
    k >>= 1;
    if (k > 0) sq = sq * sq;
  }
  return result;
}

double map_dist(const Matrix& a, const Matrix& b, int d, NormKind norm) {
  Superoperator diff(d, a - b);
  if (norm == NormKind::diamond) return diamond_norm(diff).value;
  return induced_trace_norm(diff).value;
}

// Cached propagator exp(s*M): spectral form when M is comfortably
// diagonalizable, scaling-and-squaring expm otherwise.
struct PropCache {
  Matrix m;
  bool spectral = false;
  Matrix v, vinv;
  Vector lam;

  explicit PropCache(Matrix mm) : m(std::move(mm)) {
    EigResult e = eig_general(m);
    if (e.diagonalizable && e.cond < eig_cond_threshold) {
      spectral = true;
      v = e.right;
      vinv = e.left;
      lam = e.eigenvalues;
    }
  }

  Matrix at(double s) const {
    if (spectral) {
      Vector ph = (lam.array() * s).exp().matrix();
      return v * ph.asDiagonal() * vinv;
    }
    return expm(m, s);
  }
};

using MatFn = std::function<Matrix(double)>;

Matrix simpson_rec(const MatFn& f, double a, double b, const Matrix& fa, const Matrix& fm,
                   const Matrix& fb, const Matrix& whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const Matrix flm = f(lm), frm = f(rm);
  const Matrix left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const Matrix right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const Matrix sum = left + right;
  const double err = (sum - whole).norm() / 15.0;
  if (err <= tol || (b - a) < 1e-14 * std::max(1.0, std::abs(b))) {
    return sum + (sum - whole) / 15.0;  // Richardson correction
  }
  if (depth <= 0) throw std::runtime_error("duhamel quadrature failed to converge");
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

Matrix adaptive_simpson(const MatFn& f, double a, double b, double tol) {
  if (b <= a) return Matrix::Zero(f(a).rows(), f(a).cols());
  const Matrix fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const Matrix whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

Channel exact_channel(int d, const Matrix& generator, double t, ChannelKind kind) {
  return Channel{d, Superoperator(d, expm(generator, t)), kind};
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Log-log fit with the solver-floor rule: points within 10x of the 1e-12
// tolerance floor carry no slope information and are dropped.  Degenerate
// inputs yield a zero fit rather than an exception so sweep reports always
// materialize.
LineFit filtered_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] > 1e-11) {
      xs.push_back(x[i]);
      ys.push_back(y[i]);
    }
  }
  if (xs.size() < 2) return LineFit{};
  return fit_loglog(xs, ys);
}

} // namespace

Channel trotter_step(const StiffGenerator& sg, double dt, int order) {
  if (!(dt > 0.0)) throw std::invalid_argument("trotter_step: dt must be positive");
  if (order != 1 && order != 2) throw std::invalid_argument("trotter_step: order must be 1 or 2");
  const int d = sg.fast.dim;
  const Matrix fast_phys = sg.fast.superop.mat / sg.epsilon;
  const Matrix& slow = sg.slow.superop.mat;
  Matrix step;
  if (order == 1) {
    step = expm(fast_phys, dt) * expm(slow, dt);
  } else {
    const Matrix half_fast = expm(fast_phys, 0.5 * dt);
    step = half_fast * expm(slow, dt) * half_fast;
  }
  // Exact expm of Lindbladian factors: the composition is CPTP by
  // construction.
  return Channel{d, Superoperator(d, step), ChannelKind::cptp};
}

TrotterCertificate trotter_error_certificate(const StiffGenerator& sg, double dt) {
  const int d = sg.fast.dim;
  const Matrix fast_phys = sg.fast.superop.mat / sg.epsilon;
  const Matrix& slow = sg.slow.superop.mat;
  const Matrix commutator = fast_phys * slow - slow * fast_phys;

  TrotterCertificate cert;
  cert.bound = 0.5 * dt * dt * diamond_norm(Superoperator(d, commutator)).value;

  const Channel step = trotter_step(sg, dt, 1);
  const Matrix exact = expm(sg.full().mat, dt);
  cert.measured = diamond_norm(Superoperator(d, step.map.mat - exact)).value;
  cert.ratio = cert.bound > 1e-300 ? cert.measured / cert.bound : 0.0;
  return cert;
}

namespace {

// Order-r truncated Taylor series of exp(tau * L_fast) with CP-cone
// projection when the Choi matrix dips below -1e-10 (unit-normalized).
Matrix digital_fast_substep(const StiffGenerator& sg, double tau, int order, bool& clipped,
                            double& clip_violation) {
  const int d = sg.fast.dim;
  const Matrix m = tau * sg.fast.superop.mat;
  Matrix term = Matrix::Identity(m.rows(), m.cols());
  Matrix series = term;
  for (int k = 1; k <= order; ++k) {
    term = (term * m) / static_cast<double>(k);
    series += term;
  }

  const Matrix j = choi(Superoperator(d, series));
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm_part(j));
  const double min_eig = es.eigenvalues().minCoeff() / d;  // unit-normalized
  if (min_eig < -1e-10) {
    clipped = true;
    clip_violation = -min_eig;
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    Matrix jc = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    const double tr = jc.trace().real();
    if (tr > 1e-300) jc *= static_cast<double>(d) / tr;
    return superop_from_choi(jc, d).mat;
  }
  return series;
}

Matrix slow_factor(const ProtocolConfig& cfg) {
  const StiffGenerator& sg = *cfg.stiff;
  if (cfg.slow_source == SlowSource::effective) {
    EffectiveGenerator eg = effective_generator(sg);
    return expm(eg.eff.mat, cfg.dt) * eg.projection.mat;
  }
  return expm(sg.slow.superop.mat, cfg.dt);
}

} // namespace

StepResult layered_step(const ProtocolConfig& cfg) {
  validate(cfg);
  if (cfg.mode != ProtocolMode::layered_analog && cfg.mode != ProtocolMode::layered_digital)
    throw std::invalid_argument("layered_step: mode must be layered-analog or layered-digital");

  const StiffGenerator& sg = *cfg.stiff;
  const int d = sg.fast.dim;

  StepResult out;
  Matrix fast_layer;
  if (cfg.mode == ProtocolMode::layered_analog) {
    // One-shot exact relaxation over the full step.
    fast_layer = expm(sg.fast.superop.mat / sg.epsilon, cfg.dt);
    out.n_substeps = 1;
  } else {
    const long n = fast_substep_count(cfg);
    out.n_substeps = n;
    const Matrix sub =
        digital_fast_substep(sg, cfg.fast_substep, cfg.fast_order, out.clipped, out.clip_violation);
    fast_layer = mat_pow(sub, n);
  }

  const Matrix step = slow_factor(cfg) * fast_layer;
  ChannelKind kind = ChannelKind::cptp;
  if (cfg.mode == ProtocolMode::layered_digital || cfg.slow_source == SlowSource::effective) {
    kind = verify_cptp(Superoperator(d, step), 1e-8).kind();
  }
  out.channel = Channel{d, Superoperator(d, step), kind};
  return out;
}

StepResult protocol_step(const ProtocolConfig& cfg) {
  validate(cfg);
  const StiffGenerator& sg = *cfg.stiff;
  const int d = sg.fast.dim;
  switch (cfg.mode) {
    case ProtocolMode::standard_trotter: {
      StepResult out;
      out.channel = trotter_step(sg, cfg.dt, cfg.slow_order);
      return out;
    }
    case ProtocolMode::layered_analog:
    case ProtocolMode::layered_digital:
      return layered_step(cfg);
    case ProtocolMode::effective_only: {
      EffectiveGenerator eg = effective_generator(sg);
      const Matrix step = expm(eg.eff.mat, cfg.dt) * eg.projection.mat;
      StepResult out;
      out.channel =
          Channel{d, Superoperator(d, step), verify_cptp(Superoperator(d, step), 1e-8).kind()};
      return out;
    }
  }
  throw std::invalid_argument("protocol_step: unknown mode");
}

EvolveResult evolve(const ProtocolConfig& cfg) {
  validate(cfg);
  const long n = std::max<long>(1, static_cast<long>(std::ceil(cfg.total_time / cfg.dt - 1e-9)));
  StepResult st = protocol_step(cfg);

  EvolveResult out;
  out.steps = n;
  out.clipped = st.clipped;
  out.clip_violation = st.clip_violation;

  const int d = st.channel.dim;
  Matrix total = mat_pow(st.channel.map.mat, n);
  Superoperator s(d, std::move(total));
  out.cptp = verify_cptp(s, 1e-8);
  out.cp_violation = std::max(0.0, -out.cptp.min_choi_eig);
  if (out.cp_violation > 1e-4) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "evolve: composed channel left the CP cone (violation %.3e > 1e-4, mode %s, "
                  "steps %ld)",
                  out.cp_violation, to_string(cfg.mode).c_str(), n);
    throw std::runtime_error(buf);
  }
  out.channel = Channel{d, std::move(s), out.cptp.kind()};
  return out;
}

Superoperator duhamel_oracle(const StiffGenerator& sg, double t, int terms) {
  if (terms != 1 && terms != 2)
    throw std::invalid_argument("duhamel_oracle: terms must be 1 or 2");
  if (t < 0.0) throw std::invalid_argument("duhamel_oracle: t must be nonnegative");
  const int d = sg.fast.dim;
  const Matrix a0 = sg.fast.superop.mat / sg.epsilon;
  const Matrix& l1 = sg.slow.superop.mat;
  const PropCache p0(a0);
  const PropCache pe(sg.full().mat);

  if (t == 0.0) return Superoperator::identity(d);
  const double tol = 1e-10 * std::max(1.0, pe.at(t).norm());

  if (terms == 1) {
    const MatFn f = [&](double s) { return Matrix(p0.at(t - s) * l1 * pe.at(s)); };
    return Superoperator(d, p0.at(t) + adaptive_simpson(f, 0.0, t, tol));
  }

  // Second Dyson iterate: substitute the identity once into its own integral.
  const MatFn f_free = [&](double s) { return Matrix(p0.at(t - s) * l1 * p0.at(s)); };
  const Matrix first = adaptive_simpson(f_free, 0.0, t, tol);
  const MatFn f_nested = [&](double s2) {
    const MatFn inner = [&](double s1) { return Matrix(p0.at(s2 - s1) * l1 * pe.at(s1)); };
    const Matrix g = adaptive_simpson(inner, 0.0, s2, tol / std::max(1.0, t));
    return Matrix(p0.at(t - s2) * l1 * g);
  };
  const Matrix second = adaptive_simpson(f_nested, 0.0, t, tol);
  return Superoperator(d, p0.at(t) + first + second);
}

Superoperator duhamel_interaction_term(const StiffGenerator& sg, double t) {
  if (t < 0.0) throw std::invalid_argument("duhamel_interaction_term: t must be nonnegative");
  const int d = sg.fast.dim;
  if (t == 0.0) return Superoperator::zero(d);
  const Matrix a0 = sg.fast.superop.mat / sg.epsilon;
  const Matrix& l1 = sg.slow.superop.mat;
  const Matrix& proj = sg.spectral_fast.projection.mat;
  const PropCache p0(a0);
  const PropCache pe(sg.full().mat);
  const double tol = 1e-10 * std::max(1.0, pe.at(t).norm());
  const MatFn f = [&](double s) { return Matrix((p0.at(t - s) - proj) * l1 * pe.at(s)); };
  return Superoperator(d, adaptive_simpson(f, 0.0, t, tol));
}

namespace {

struct PerEps {
  StiffGenerator sge;
  EffectiveGenerator eff;
};

} // namespace

SweepReport ap_verify(const ProtocolConfig& proto, const std::vector<double>& eps_grid,
                      const std::vector<double>& dt_grid, NormKind norm, int threads) {
  if (proto.stiff == nullptr) throw std::invalid_argument("ap_verify: missing stiff generator");
  if (eps_grid.size() < 4 || dt_grid.size() < 4)
    throw std::invalid_argument("ap_verify: need >= 4 points per grid axis");

  const int n_eps = static_cast<int>(eps_grid.size());
  const int n_dt = static_cast<int>(dt_grid.size());
  const int d = proto.stiff->fast.dim;

  std::vector<PerEps> per;
  per.reserve(n_eps);
  for (double e : eps_grid) {
    PerEps p{with_epsilon(*proto.stiff, e), {}};
    p.eff = effective_generator(p.sge);
    per.push_back(std::move(p));
  }

  SweepReport rep;
  rep.mode = proto.mode;
  rep.norm = norm;
  rep.eps_grid = eps_grid;
  rep.dt_grid = dt_grid;
  rep.cells.resize(static_cast<std::size_t>(n_eps) * n_dt);

  parallel_for(
      n_eps * n_dt,
      [&](int idx) {
        const int i = idx / n_dt, j = idx % n_dt;
        const double eps = eps_grid[i], dt = dt_grid[j];
        const PerEps& pp = per[i];

        ProtocolConfig cell_cfg = proto;
        cell_cfg.stiff = &pp.sge;
        cell_cfg.dt = dt;
        cell_cfg.total_time = dt;
        const StepResult st = protocol_step(cell_cfg);
        const Matrix& psi = st.channel.map.mat;

        const Matrix exact = expm(pp.sge.full().mat, dt);
        const Matrix asym = expm(pp.eff.eff.mat, dt) * pp.eff.projection.mat;
        const Matrix diagram = expm(pp.eff.first_order.mat, dt) * pp.eff.projection.mat;

        SweepCell cell;
        cell.eps = eps;
        cell.dt = dt;
        cell.clipped = st.clipped;
        cell.clip_violation = st.clip_violation;
        cell.consistency_err = map_dist(psi, exact, d, norm);
        cell.asymptotic_err = map_dist(psi, asym, d, norm);
        cell.diagram_dist = map_dist(psi, diagram, d, norm);

        // Error decomposition by exact-factor substitution.  The protocol
        // step factors as (slow factor) o (fast composite); replacing each
        // factor in turn by its exact counterpart telescopes the consistency
        // error into slow-layer, fast-layer, and interaction contributions.
        const Matrix fast_exact = expm(pp.sge.fast.superop.mat / eps, dt);
        switch (proto.mode) {
          case ProtocolMode::standard_trotter:
            // Both factors exact: the whole error is non-commutativity.
            cell.slow_err = 0.0;
            cell.fast_err = 0.0;
            cell.interaction_err = cell.consistency_err;
            break;
          case ProtocolMode::layered_analog:
          case ProtocolMode::layered_digital: {
            const Matrix slow_exact = expm(pp.sge.slow.superop.mat, dt);
            // Slow factor is exact expm by construction.
            cell.slow_err = 0.0;
            ProtocolConfig fast_only = cell_cfg;
            // Reconstruct the protocol's fast composite alone.
            Matrix fast_approx;
            if (proto.mode == ProtocolMode::layered_analog) {
              fast_approx = fast_exact;
            } else {
              bool clipped = false;
              double viol = 0.0;
              const Matrix sub = digital_fast_substep(pp.sge, fast_only.fast_substep,
                                                      fast_only.fast_order, clipped, viol);
              fast_approx = mat_pow(sub, fast_substep_count(fast_only));
            }
            cell.fast_err = map_dist(slow_exact * fast_approx, slow_exact * fast_exact, d, norm);
            cell.interaction_err = map_dist(slow_exact * fast_exact, exact, d, norm);
            break;
          }
          case ProtocolMode::effective_only: {
            const Matrix s_eff = expm(pp.eff.eff.mat, dt);
            cell.slow_err = 0.0;
            cell.fast_err =
                map_dist(s_eff * pp.eff.projection.mat, s_eff * fast_exact, d, norm);
            cell.interaction_err = map_dist(s_eff * fast_exact, exact, d, norm);
            break;
          }
        }
        cell.triangle_ok = cell.consistency_err <=
                           cell.slow_err + cell.fast_err + cell.interaction_err + 1e-8;

        // Diamond spot-checks on the four grid corners.
        if ((i == 0 || i == n_eps - 1) && (j == 0 || j == n_dt - 1)) {
          cell.diamond_checked = true;
          cell.diamond_consistency =
              diamond_norm(Superoperator(d, psi - exact)).value;
        }
        rep.cells[idx] = std::move(cell);
      },
      threads);

  // Per-eps dt-slopes of the consistency error (p), per-dt eps-slopes of the
  // asymptotic error (q).
  for (int i = 0; i < n_eps; ++i) {
    std::vector<double> xs, ys;
    for (int j = 0; j < n_dt; ++j) {
      xs.push_back(dt_grid[j]);
      ys.push_back(rep.cells[static_cast<std::size_t>(i) * n_dt + j].consistency_err);
    }
    rep.dt_fits.push_back(filtered_loglog(xs, ys));
  }
  for (int j = 0; j < n_dt; ++j) {
    std::vector<double> xs, ys;
    for (int i = 0; i < n_eps; ++i) {
      xs.push_back(eps_grid[i]);
      ys.push_back(rep.cells[static_cast<std::size_t>(i) * n_dt + j].asymptotic_err);
    }
    rep.eps_fits.push_back(filtered_loglog(xs, ys));
  }
  std::vector<double> ps, qs;
  for (const auto& f : rep.dt_fits) ps.push_back(f.slope);
  for (const auto& f : rep.eps_fits) qs.push_back(f.slope);
  rep.p_estimate = median(ps);
  rep.q_estimate = median(qs);

  // Two-term model  asymptotic_err ~ a * eps * dt + b * dt^2  (normal
  // equations over all cells).
  {
    double s11 = 0, s12 = 0, s22 = 0, r1 = 0, r2 = 0, yy = 0;
    for (const auto& c : rep.cells) {
      const double u = c.eps * c.dt, v = c.dt * c.dt, y = c.asymptotic_err;
      s11 += u * u;
      s12 += u * v;
      s22 += v * v;
      r1 += u * y;
      r2 += v * y;
      yy += y * y;
    }
    const double det = s11 * s22 - s12 * s12;
    if (std::abs(det) > 1e-300) {
      rep.two_term_a = (r1 * s22 - r2 * s12) / det;
      rep.two_term_b = (s11 * r2 - s12 * r1) / det;
      double res = 0;
      for (const auto& c : rep.cells) {
        const double fit = rep.two_term_a * c.eps * c.dt + rep.two_term_b * c.dt * c.dt;
        res += (c.asymptotic_err - fit) * (c.asymptotic_err - fit);
      }
      rep.two_term_residual = yy > 0 ? std::sqrt(res / yy) : 0.0;
    }
  }

  rep.triangle_ok = true;
  for (const auto& c : rep.cells) rep.triangle_ok = rep.triangle_ok && c.triangle_ok;

  // Diagram commutativity: at each dt, the distance to the limiting step
  // must decrease (within noise) as eps decreases.
  rep.diagram_monotone = true;
  std::vector<int> order(n_eps);
  for (int i = 0; i < n_eps; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return eps_grid[a] > eps_grid[b]; });
  for (int j = 0; j < n_dt; ++j) {
    for (int k = 1; k < n_eps; ++k) {
      const double prev =
          rep.cells[static_cast<std::size_t>(order[k - 1]) * n_dt + j].diagram_dist;
      const double cur = rep.cells[static_cast<std::size_t>(order[k]) * n_dt + j].diagram_dist;
      if (cur > prev + 1e-9) rep.diagram_monotone = false;
    }
  }
  return rep;
}

SweepReport ap_verify(const StiffGenerator& sg, const std::vector<double>& dt_grid,
                      const std::vector<double>& eps_grid, NormKind norm, int threads) {
  ProtocolConfig proto;
  proto.mode = ProtocolMode::layered_analog;
  proto.stiff = &sg;
  proto.dt = dt_grid.empty() ? 1.0 : dt_grid.front();
  proto.total_time = proto.dt;
  return ap_verify(proto, eps_grid, dt_grid, norm, threads);
}

std::string sweep_to_csv(const SweepReport& report) {
  std::string out =
      "eps,dt,norm,consistency_err,asymptotic_err,slow_err,fast_err,interaction_err,flags\n";
  char buf[512];
  for (const auto& c : report.cells) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%s,%.17g,%.17g,%.17g,%.17g,%.17g,", c.eps, c.dt,
                  to_string(report.norm).c_str(), c.consistency_err, c.asymptotic_err, c.slow_err,
                  c.fast_err, c.interaction_err);
    out += buf;
    std::string flags = c.triangle_ok ? "triangle_ok" : "triangle_fail";
    if (c.diamond_checked) flags += ";diamond_checked";
    if (c.clipped) flags += ";clipped";
    out += flags;
    out += '\n';
  }
  return out;
}

long trotter_steps_to_accuracy(const StiffGenerator& sg, double total_time, double delta,
                               NormKind norm, int order, long cap, StepCountMethod method) {
  if (!(total_time > 0.0) || !(delta > 0.0))
    throw std::invalid_argument("trotter_steps_to_accuracy: need positive time and target");
  if (method == StepCountMethod::certified) {
    // Accumulated bound after n steps: n * (T/n)^2/2 * ||[eps^-1 Lf, Ls]||_dia
    // = T^2 C / (2n); smallest admissible n in closed form.
    const TrotterCertificate cert = trotter_error_certificate(sg, total_time);
    const double need = std::ceil(cert.bound / delta - 1e-12);
    const long n = need < 1.0 ? 1L : static_cast<long>(need);
    if (n > cap)
      throw std::runtime_error("trotter_steps_to_accuracy: step cap reached before target");
    return n;
  }
  const int d = sg.fast.dim;
  const Matrix exact = expm(sg.full().mat, total_time);
  const auto err_at = [&](long n) {
    const Channel step = trotter_step(sg, total_time / static_cast<double>(n), order);
    return map_dist(mat_pow(step.map.mat, n), exact, d, norm);
  };

  long hi = 1;
  while (err_at(hi) > delta) {
    if (hi >= cap)
      throw std::runtime_error("trotter_steps_to_accuracy: step cap reached before target");
    hi *= 2;
  }
  long lo = hi / 2;  // err_at(lo) > delta when lo >= 1
  while (lo + 1 < hi) {
    const long mid = lo + (hi - lo) / 2;
    if (err_at(mid) <= delta)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

ResourceEstimate resource_model(const ProtocolConfig& cfg, double c, double delta,
                                double poly_delta_exponent, const ResourceCalibration& cal) {
  if (cfg.stiff == nullptr) throw std::invalid_argument("resource_model: missing stiff generator");
  const StiffGenerator& sg = *cfg.stiff;
  if (!sg.split) throw std::invalid_argument("resource_model: requires a declared tensor split");
  if (!(delta > 0.0)) throw std::invalid_argument("resource_model: delta must be positive");
  if (!(cfg.total_time > 0.0))
    throw std::invalid_argument("resource_model: total_time must be positive");
  if (!(sg.spectral_fast.gap > 0.0))
    throw std::invalid_argument("resource_model: fast part must be gapped");

  ResourceEstimate est;
  est.c = c;
  est.d_fast = sg.split->d_fast;
  est.d_slow = sg.split->d_slow;
  est.d_tot = est.d_fast * est.d_slow;
  est.poly_delta = std::pow(1.0 / delta, poly_delta_exponent);
  est.tau_1 = sg.epsilon / sg.spectral_fast.gap;

  if (cal.tau_n_override) {
    est.tau_n = *cal.tau_n_override;
  } else if (cal.kappa_override) {
    est.tau_n = *cal.kappa_override * est.tau_1;
  } else {
    const double gap_slow = analyze(sg.slow.superop).gap;
    est.tau_n = gap_slow > 1e-12 ? 1.0 / gap_slow : 1.0 / op_norm(sg.slow.superop.mat);
  }
  est.kappa = est.tau_n / est.tau_1;

  const double t = cfg.total_time;
  const double dim_full = std::pow(est.d_tot, c);
  const double dim_slow = std::pow(est.d_slow, c);
  est.t_precomp = est.d_tot * est.d_tot * est.d_tot;
  est.g_std = cal.c_std * (t / est.tau_1) * dim_full * est.poly_delta;
  est.g_ap_digital = cal.c_digital * (t / est.tau_1) * dim_full * est.poly_delta;
  est.g_ap_analog = cal.c_analog * (t / est.tau_n) * dim_slow * est.poly_delta;
  est.g_ap_elim = cal.c_elim * (t / est.tau_n + est.t_precomp) * dim_slow * est.poly_delta;
  est.savings_ratio = est.g_ap_analog > 1e-300 ? est.g_std / est.g_ap_analog : 0.0;
  return est;
}

} // namespace apq
