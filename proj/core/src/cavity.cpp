#include "apq/cavity.hpp"

#include <cmath>
#include <stdexcept>

#include "apq/linalg.hpp"
#include "apq/operators.hpp"

namespace apq {

void validate(const CavityModel& m) {
  if (!(m.kappa > 0.0)) throw std::invalid_argument("cavity model: kappa must be positive");
  if (m.g < 0.0) throw std::invalid_argument("cavity model: g must be nonnegative");
  if (m.n_max < 2) throw std::invalid_argument("cavity model: n_max must be at least 2");
}

StiffGenerator build_cavity(const CavityModel& m) {
  validate(m);
  const int dc = m.n_max + 1;
  const Matrix a = annihilation(dc);
  const Matrix ic = Matrix::Identity(dc, dc);
  const Matrix i2 = Matrix::Identity(2, 2);

  // Stored fast part: eps * kappa * D[a (x) I] = g * D[a (x) I] for g > 0
  // (jump sqrt(g) a (x) I); for g = 0 the physical kappa * D[a] with eps = 1.
  const double fast_amp = m.g > 0.0 ? m.g : m.kappa;
  const double eps = m.g > 0.0 ? m.epsilon() : 1.0;
  LindbladGenerator fast =
      build_generator(Matrix::Zero(2 * dc, 2 * dc), {std::sqrt(fast_amp) * kron(a, i2)});

  const Matrix h_int = m.g * (kron(a, sigma_plus()) + kron(a.adjoint(), sigma_minus()));
  const Matrix h_slow = 0.5 * m.omega_q * kron(ic, sigma_z()) + h_int;
  LindbladGenerator slow = build_generator(h_slow, {});

  Matrix vac = Matrix::Zero(dc, dc);
  vac(0, 0) = 1.0;
  return make_stiff(fast, slow, eps, TensorSplit{dc, 2, vac}, h_int);
}

PurcellReport purcell_check(const CavityModel& m) {
  validate(m);
  if (m.n_max < 3)
    throw std::invalid_argument("purcell_check: n_max must be at least 3 for the cutoff probe");

  const auto reduced_at = [&](int n_max) {
    CavityModel mm = m;
    mm.n_max = n_max;
    EffectiveGenerator eg = effective_generator(build_cavity(mm));
    if (!eg.reduced) throw std::runtime_error("purcell_check: reduction unavailable");
    return *eg.reduced;
  };

  PurcellReport rep;
  rep.reduced = reduced_at(m.n_max);
  rep.gamma_formula = 4.0 * m.g * m.g / m.kappa;

  // Column-stacked qubit superoperator: the |1><1| -> |0><0| gain entry of
  // D[sigma-] is row 0, column 3, with unit coefficient.
  rep.gamma = rep.reduced(0, 3).real();

  LindbladGenerator target =
      build_generator(0.5 * m.omega_q * sigma_z(),
                      {std::sqrt(rep.gamma_formula) * sigma_minus()});
  rep.target = target.superop.mat;
  rep.max_entry_dev = (rep.reduced - rep.target).cwiseAbs().maxCoeff();
  rep.cutoff_sensitivity = (reduced_at(m.n_max + 2) - rep.reduced).cwiseAbs().maxCoeff();
  return rep;
}

SweepReport cavity_ap_sweep(const CavityModel& m, const std::vector<double>& dt_grid,
                            const std::vector<double>& eps_grid, NormKind norm, int threads) {
  validate(m);
  if (!(m.g > 0.0)) throw std::invalid_argument("cavity_ap_sweep: needs g > 0");
  for (double eps : eps_grid) {
    if (!(eps > 0.0)) throw std::invalid_argument("cavity_ap_sweep: eps must be positive");
    const double gamma = 4.0 * m.g * m.g / (m.g / eps);  // 4 g^2 / kappa(eps) = 4 g eps
    const double dt_cap = std::min(1.0 / m.omega_q, 1.0 / gamma);
    for (double dt : dt_grid)
      if (dt > dt_cap * (1.0 + 1e-12))
        throw std::invalid_argument(
            "cavity_ap_sweep: dt grid violates dt <= min(1/omega_q, 1/gamma)");
  }

  StiffGenerator sg = build_cavity(m);
  ProtocolConfig proto;
  proto.mode = ProtocolMode::layered_analog;
  proto.stiff = &sg;
  proto.dt = dt_grid.empty() ? 1.0 : dt_grid.front();
  proto.total_time = proto.dt;
  return ap_verify(proto, eps_grid, dt_grid, norm, threads);
}

std::vector<ResourceEstimate> cavity_resource_table(const CavityModel& m,
                                                    const std::vector<double>& eps_grid,
                                                    double total_time, double delta, double c) {
  validate(m);
  if (!(m.g > 0.0)) throw std::invalid_argument("cavity_resource_table: needs g > 0");
  StiffGenerator sg = build_cavity(m);

  std::vector<ResourceEstimate> rows;
  rows.reserve(eps_grid.size());
  for (double eps : eps_grid) {
    StiffGenerator se = with_epsilon(sg, eps);
    ProtocolConfig cfg;
    cfg.stiff = &se;
    cfg.dt = total_time;
    cfg.total_time = total_time;
    ResourceCalibration cal;
    cal.tau_n_override = 1.0 / m.g;  // the exchange coupling sets the slow scale
    rows.push_back(resource_model(cfg, c, delta, 1.0, cal));
  }
  return rows;
}

}  // namespace apq
