#include "apq/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "apq/parallel.hpp"

namespace apq {

namespace {

constexpr double kNegativeDust = 1e-12;

// Eight-point Gauss-Hermite quadrature in probabilists' normalization:
// nodes v_j and weights w_j with sum w = 1, sum w v^2 = 1, sum w v^4 = 3.
// Derived from the physicists' rule (roots of H_8, weight e^{-x^2}) by
// v = sqrt(2) x and w = w_phys / sqrt(pi).
const double kGhNodes[8] = {
    -4.1445471861258945, -2.8024858612875416, -1.6365190424351082,
    -0.5390798113513751, 0.5390798113513751,  1.6365190424351082,
    2.8024858612875416,  4.1445471861258945};
const double kGhWeights[8] = {
    1.1261453837536777e-04, 9.6352201207882602e-03, 1.1723990766175897e-01,
    3.7301225767907736e-01, 3.7301225767907736e-01, 1.1723990766175897e-01,
    9.6352201207882602e-03, 1.1261453837536777e-04};

void check_grid_divides(double total_time, double dt) {
  const double n = total_time / dt;
  if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
    throw std::invalid_argument("kinetic_ap_sweep: dt must divide total_time");
}

// Explicit first-order upwind transport, periodic, one step of size dt.
RMatrix upwind_transport(const KineticState& s, double dt) {
  const int nx = s.nx;
  const int nv = static_cast<int>(s.velocities.size());
  RMatrix out(nx, nv);
  for (int j = 0; j < nv; ++j) {
    const double lam = s.velocities[j] * dt / s.dx;
    if (lam >= 0.0) {
      for (int i = 0; i < nx; ++i) {
        const int im = (i == 0) ? nx - 1 : i - 1;
        out(i, j) = s.f(i, j) - lam * (s.f(i, j) - s.f(im, j));
      }
    } else {
      for (int i = 0; i < nx; ++i) {
        const int ip = (i == nx - 1) ? 0 : i + 1;
        out(i, j) = s.f(i, j) - lam * (s.f(ip, j) - s.f(i, j));
      }
    }
  }
  return out;
}

void clip_dust(KineticState& s) {
  for (int j = 0; j < s.f.cols(); ++j)
    for (int i = 0; i < s.f.rows(); ++i) {
      double& v = s.f(i, j);
      if (v < 0.0) {
        if (v < -kNegativeDust)
          throw std::runtime_error(
              "kinetic step: negative value below the numerical-dust tolerance");
        s.worst_clip = std::max(s.worst_clip, -v);
        ++s.clip_events;
        v = 0.0;
      }
    }
}

void check_mass(const KineticState& before, const KineticState& after) {
  const double m0 = total_mass(before);
  const double m1 = total_mass(after);
  if (std::abs(m1 - m0) > 1e-12 * std::max(1.0, std::abs(m0)))
    throw std::runtime_error("kinetic step: mass drift above 1e-12 relative");
}

KineticState equilibrium_init(int nx, double epsilon,
                              const std::function<double(double)>& rho0,
                              std::vector<double> velocities,
                              std::vector<double> weights) {
  if (nx < 2) throw std::invalid_argument("kinetic state: need nx >= 2");
  if (epsilon <= 0.0) throw std::invalid_argument("kinetic state: epsilon must be positive");
  if (!rho0) throw std::invalid_argument("kinetic state: null density profile");
  KineticState s;
  s.nx = nx;
  s.velocities = std::move(velocities);
  s.weights = std::move(weights);
  s.dx = 1.0 / nx;
  s.epsilon = epsilon;
  const int nv = static_cast<int>(s.velocities.size());
  s.f.resize(nx, nv);
  for (int i = 0; i < nx; ++i) {
    const double rho = rho0((i + 0.5) * s.dx);
    if (rho < 0.0)
      throw std::invalid_argument("kinetic state: negative initial density");
    for (int j = 0; j < nv; ++j) s.f(i, j) = rho;  // weighted representation
  }
  validate(s);
  return s;
}

}  // namespace

void validate(const KineticState& s) {
  if (s.nx < 2) throw std::invalid_argument("kinetic state: need nx >= 2");
  if (s.dx <= 0.0) throw std::invalid_argument("kinetic state: dx must be positive");
  if (s.epsilon <= 0.0) throw std::invalid_argument("kinetic state: epsilon must be positive");
  const int nv = static_cast<int>(s.velocities.size());
  if (nv < 2) throw std::invalid_argument("kinetic state: need >= 2 velocity nodes");
  if (s.weights.size() != s.velocities.size())
    throw std::invalid_argument("kinetic state: weights/velocities size mismatch");
  if (s.f.rows() != s.nx || s.f.cols() != nv)
    throw std::invalid_argument("kinetic state: f must be nx x n_velocities");
  double wsum = 0.0;
  for (double w : s.weights) {
    if (w <= 0.0) throw std::invalid_argument("kinetic state: weights must be positive");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw std::invalid_argument("kinetic state: weights must sum to 1");
  if (s.f.minCoeff() < -kNegativeDust)
    throw std::invalid_argument("kinetic state: f below the numerical-dust tolerance");
}

KineticState two_velocity_state(int nx, double epsilon,
                                const std::function<double(double)>& rho0,
                                double speed) {
  if (speed <= 0.0) throw std::invalid_argument("two_velocity_state: speed must be positive");
  return equilibrium_init(nx, epsilon, rho0, {-speed, speed}, {0.5, 0.5});
}

KineticState gauss_hermite_state(int nx, double epsilon,
                                 const std::function<double(double)>& rho0) {
  return equilibrium_init(nx, epsilon, rho0,
                          std::vector<double>(kGhNodes, kGhNodes + 8),
                          std::vector<double>(kGhWeights, kGhWeights + 8));
}

RVector density(const KineticState& s) {
  RVector rho = RVector::Zero(s.nx);
  for (int j = 0; j < s.f.cols(); ++j) rho += s.weights[j] * s.f.col(j);
  return rho;
}

RVector momentum(const KineticState& s) {
  RVector m = RVector::Zero(s.nx);
  for (int j = 0; j < s.f.cols(); ++j) m += s.weights[j] * s.velocities[j] * s.f.col(j);
  return m;
}

RVector energy(const KineticState& s) {
  RVector e = RVector::Zero(s.nx);
  for (int j = 0; j < s.f.cols(); ++j)
    e += s.weights[j] * s.velocities[j] * s.velocities[j] * s.f.col(j);
  return e;
}

double total_mass(const KineticState& s) { return density(s).sum() * s.dx; }

RMatrix maxwellian(const KineticState& s) {
  validate(s);
  const int nv = static_cast<int>(s.velocities.size());
  const RVector rho = density(s);
  if (rho.minCoeff() < 0.0)
    throw std::invalid_argument("maxwellian: negative density");
  RMatrix m(s.nx, nv);
  if (nv == 2) {
    // Mass-only equilibrium: the flux relaxes to zero (diffusive limit).
    for (int j = 0; j < nv; ++j) m.col(j) = rho;
    return m;
  }
  // Quadratic ansatz matching mass, momentum, and energy exactly for any
  // symmetric node set with sum w = 1, sum w v^2 = 1, sum w v^4 = 3.
  const RVector mom = momentum(s);
  const RVector en = energy(s);
  for (int i = 0; i < s.nx; ++i) {
    const double r = rho[i];
    const double u = (r > 0.0) ? mom[i] / r : 0.0;
    const double beta = (r > 0.0) ? en[i] / r - 1.0 : 0.0;
    for (int j = 0; j < nv; ++j) {
      const double v = s.velocities[j];
      m(i, j) = r * (1.0 + u * v + 0.5 * beta * (v * v - 1.0));
    }
  }
  return m;
}

KineticState bgk_collision(const KineticState& s) {
  KineticState q = s;
  q.f = maxwellian(s) - s.f;
  return q;
}

double cfl_limit(const KineticState& s) {
  double vmax = 0.0;
  for (double v : s.velocities) vmax = std::max(vmax, std::abs(v));
  return 0.9 * s.dx / vmax;
}

KineticState imex_step(const KineticState& s, double dt) {
  validate(s);
  if (dt <= 0.0) throw std::invalid_argument("imex_step: dt must be positive");
  if (dt > cfl_limit(s) * (1.0 + 1e-12))
    throw std::invalid_argument("imex_step: dt violates the CFL bound 0.9 dx / max|v|");
  KineticState out = s;
  out.f = upwind_transport(s, dt);
  const RMatrix m = maxwellian(out);
  const double a = dt / s.epsilon;
  out.f = (out.f + a * m) / (1.0 + a);
  clip_dust(out);
  check_mass(s, out);
  return out;
}

KineticState layered_step(const KineticState& s, double dt) {
  validate(s);
  if (dt <= 0.0) throw std::invalid_argument("layered_step: dt must be positive");
  if (dt > cfl_limit(s) * (1.0 + 1e-12))
    throw std::invalid_argument("layered_step: dt violates the CFL bound 0.9 dx / max|v|");
  KineticState out = s;
  out.f = upwind_transport(s, dt);
  const RMatrix m = maxwellian(out);
  const long n = static_cast<long>(std::ceil(dt / s.epsilon - 1e-12));
  const long substeps = std::max<long>(1, n);
  const double tau = dt / static_cast<double>(substeps);
  const double decay = std::pow(1.0 - tau / s.epsilon, static_cast<double>(substeps));
  out.f = m + decay * (out.f - m);
  clip_dust(out);
  check_mass(s, out);
  return out;
}

FluidStepper::FluidStepper(int nx, double dx, double dt, double epsilon, double speed)
    : nx_(nx), lambda_(speed * dt / dx) {
  if (nx < 2) throw std::invalid_argument("FluidStepper: need nx >= 2");
  if (dx <= 0.0 || dt <= 0.0 || epsilon < 0.0 || speed <= 0.0)
    throw std::invalid_argument("FluidStepper: parameters must be positive");
  if (lambda_ > 0.9 * (1.0 + 1e-12))
    throw std::invalid_argument("FluidStepper: dt violates the CFL bound 0.9 dx / speed");
  // Backward-Euler periodic diffusion with the physical viscosity
  // nu = epsilon c^2:  (I - nu dt D2 / dx^2) rho_new = rho_transported.
  const double coef = epsilon * speed * speed * dt / (dx * dx);
  RMatrix a = RMatrix::Identity(nx, nx);
  for (int i = 0; i < nx; ++i) {
    const int im = (i == 0) ? nx - 1 : i - 1;
    const int ip = (i == nx - 1) ? 0 : i + 1;
    a(i, i) += 2.0 * coef;
    a(i, im) -= coef;
    a(i, ip) -= coef;
  }
  solver_.compute(a);
}

RVector FluidStepper::step(const RVector& rho) const {
  if (rho.size() != nx_) throw std::invalid_argument("FluidStepper: wrong density size");
  // Average of the two upwind-transported equilibrated halves: a diffusion
  // stencil carrying the scheme's intrinsic numerical viscosity c dx / 2.
  RVector out(nx_);
  for (int i = 0; i < nx_; ++i) {
    const int im = (i == 0) ? nx_ - 1 : i - 1;
    const int ip = (i == nx_ - 1) ? 0 : i + 1;
    out[i] = rho[i] + 0.5 * lambda_ * (rho[ip] - 2.0 * rho[i] + rho[im]);
  }
  return solver_.solve(out);
}

RVector fluid_limit_step(const RVector& rho, double dx, double dt, double epsilon,
                         double speed) {
  return FluidStepper(static_cast<int>(rho.size()), dx, dt, epsilon, speed).step(rho);
}

KineticSweepReport kinetic_ap_sweep(int nx, const std::vector<double>& eps_grid,
                                    const std::vector<double>& dt_grid,
                                    double total_time, double speed, int threads) {
  if (eps_grid.size() < 4 || dt_grid.size() < 4)
    throw std::invalid_argument("kinetic_ap_sweep: need >= 4 points per grid axis");
  if (total_time <= 0.0)
    throw std::invalid_argument("kinetic_ap_sweep: total_time must be positive");
  const auto rho0 = [](double x) { return 1.0 + 0.5 * std::sin(2.0 * M_PI * x); };

  const KineticState probe = two_velocity_state(nx, 1.0, rho0, speed);
  for (double dt : dt_grid) {
    if (dt <= 0.0 || dt > cfl_limit(probe) * (1.0 + 1e-12))
      throw std::invalid_argument("kinetic_ap_sweep: dt grid violates the CFL bound");
    check_grid_divides(total_time, dt);
  }
  for (double e : eps_grid)
    if (e <= 0.0) throw std::invalid_argument("kinetic_ap_sweep: epsilon must be positive");

  KineticSweepReport rep;
  rep.nx = nx;
  rep.total_time = total_time;
  rep.speed = speed;
  rep.eps_grid = eps_grid;
  rep.dt_grid = dt_grid;
  rep.initial_max = probe.f.cwiseAbs().maxCoeff();

  const int n_eps = static_cast<int>(eps_grid.size());
  const int n_dt = static_cast<int>(dt_grid.size());
  const double dt_min = *std::min_element(dt_grid.begin(), dt_grid.end());

  // Time-resolved references, one per epsilon: the same scheme at dt_min/100.
  std::vector<RMatrix> refs(n_eps);
  for (int i = 0; i < n_eps; ++i) {
    const double dt_ref = dt_min / 100.0;
    KineticState st = two_velocity_state(nx, eps_grid[i], rho0, speed);
    const long n_steps = std::lround(total_time / dt_ref);
    for (long k = 0; k < n_steps; ++k) st = imex_step(st, dt_ref);
    refs[i] = st.f;
  }

  rep.cells.resize(static_cast<std::size_t>(n_eps) * n_dt);
  parallel_for(
      n_eps * n_dt,
      [&](int idx) {
        const int i = idx / n_dt, j = idx % n_dt;
        const double eps = eps_grid[i], dt = dt_grid[j];
        KineticState st = two_velocity_state(nx, eps, rho0, speed);
        const long n_steps = std::lround(total_time / dt);

        KineticCell cell;
        cell.eps = eps;
        cell.dt = dt;
        cell.max_f = st.f.cwiseAbs().maxCoeff();
        double mass_prev = total_mass(st);
        for (long k = 0; k < n_steps; ++k) {
          st = imex_step(st, dt);
          const double mass_now = total_mass(st);
          cell.mass_drift = std::max(
              cell.mass_drift,
              std::abs(mass_now - mass_prev) / std::max(1.0, std::abs(mass_prev)));
          mass_prev = mass_now;
          cell.max_f = std::max(cell.max_f, st.f.cwiseAbs().maxCoeff());
        }

        // L2(x, v) distance to the resolved reference.
        double acc = 0.0;
        for (int c = 0; c < st.f.cols(); ++c)
          acc += st.weights[c] * (st.f.col(c) - refs[i].col(c)).squaredNorm();
        cell.l2_error_vs_ref = std::sqrt(acc * st.dx);

        // Density distance to the limiting fluid scheme at the same dt.
        RVector rho(nx);
        for (int c = 0; c < nx; ++c) rho[c] = rho0((c + 0.5) * st.dx);
        // Strict limit: the viscosity eps*c^2 vanishes with eps, so the
        // limiting scheme is the relaxed-transport update at zero viscosity;
        // the measured deviation is then the eps-viscosity correction itself.
        const FluidStepper fluid(nx, st.dx, dt, 0.0, speed);
        for (long k = 0; k < n_steps; ++k) rho = fluid.step(rho);
        cell.l2_error_vs_fluid = std::sqrt((density(st) - rho).squaredNorm() * st.dx);

        rep.cells[static_cast<std::size_t>(i) * n_dt + j] = cell;
      },
      threads);

  rep.stable = true;
  for (const KineticCell& c : rep.cells)
    if (c.max_f > rep.initial_max * (1.0 + 1e-2)) rep.stable = false;

  // dt-slope of the reference error at the smallest epsilon.
  int i_min_eps = 0, j_min_dt = 0;
  for (int i = 0; i < n_eps; ++i)
    if (eps_grid[i] < eps_grid[i_min_eps]) i_min_eps = i;
  for (int j = 0; j < n_dt; ++j)
    if (dt_grid[j] < dt_grid[j_min_dt]) j_min_dt = j;
  {
    std::vector<double> xs, ys;
    for (int j = 0; j < n_dt; ++j) {
      xs.push_back(std::log(dt_grid[j]));
      ys.push_back(std::log(
          rep.cells[static_cast<std::size_t>(i_min_eps) * n_dt + j].l2_error_vs_ref));
    }
    rep.dt_fit = fit_line(xs, ys);
  }
  // eps-slope of the fluid deviation at the smallest dt.
  {
    std::vector<double> xs, ys;
    for (int i = 0; i < n_eps; ++i) {
      xs.push_back(std::log(eps_grid[i]));
      ys.push_back(std::log(
          rep.cells[static_cast<std::size_t>(i) * n_dt + j_min_dt].l2_error_vs_fluid));
    }
    rep.eps_fit = fit_line(xs, ys);
  }
  return rep;
}

std::string kinetic_sweep_to_csv(const KineticSweepReport& report) {
  std::string out = "eps,dt,l2_error_vs_ref,l2_error_vs_fluid,mass_drift,max_f\n";
  char buf[256];
  for (const KineticCell& c : report.cells) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", c.eps, c.dt,
                  c.l2_error_vs_ref, c.l2_error_vs_fluid, c.mass_drift, c.max_f);
    out += buf;
  }
  return out;
}

}  // namespace apq
