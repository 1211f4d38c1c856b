#include "spinsq/metrology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include <Eigen/Dense>

#include "spinsq/errors.hpp"
#include "spinsq/parallel.hpp"

namespace spinsq {

namespace {

constexpr double kPi = 3.14159265358979323846;

using Vec3 = std::array<double, 3>;

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

double norm3(const Vec3& a) {
  return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
}

Vec3 normalized(const Vec3& a) {
  double n = norm3(a);
  return {a[0] / n, a[1] / n, a[2] / n};
}

double quad_form(const std::array<std::array<double, 3>, 3>& c, const Vec3& u,
                 const Vec3& v) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) s += u[i] * c[i][j] * v[j];
  }
  return s;
}

// Smaller eigenvalue of the symmetric 2x2 matrix [[a, c], [c, b]].
double eig2_min(double a, double b, double c) {
  double half_tr = 0.5 * (a + b);
  double rad = std::hypot(0.5 * (a - b), c);
  return half_tr - rad;
}

struct NodeTerms {
  double mass = 0.0;       // p(h) * weight
  double mass_w = 0.0;     // mass counted toward the xi^2 average
  double xi_term = 0.0;    // mass_w * xi^2(h)
  double f_term = 0.0;     // mass * F(h)
  double fr_term = 0.0;    // mass * F(h)^(-1/2)
};

double qfi_from_cov(const std::array<std::array<double, 3>, 3>& c) {
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m(i, j) = c[i][j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
  return 4.0 * es.eigenvalues().maxCoeff();
}

}  // namespace

double sql(int n_electrons) {
  if (n_electrons < 1) throw DomainError("sql requires N >= 1");
  return 1.0 / std::sqrt(static_cast<double>(n_electrons));
}

double heisenberg(int n_electrons) {
  if (n_electrons < 1) throw DomainError("heisenberg requires N >= 1");
  return 1.0 / static_cast<double>(n_electrons);
}

WinelandReport wineland_metrics(const DickeState& state) {
  SpinMoments mom = moments(state);
  Vec3 mean = mom.mean;
  double mean_norm = norm3(mean);
  const int n = state.n_electrons;
  if (mean_norm <= 1e-9 * n) {
    throw NumericalError(
        "mean spin is degenerate; Wineland frame undefined (use qfi)");
  }
  Vec3 dir = {mean[0] / mean_norm, mean[1] / mean_norm, mean[2] / mean_norm};
  Vec3 e1 = cross({0.0, 0.0, 1.0}, dir);
  if (norm3(e1) < 1e-12) e1 = cross({1.0, 0.0, 0.0}, dir);
  e1 = normalized(e1);
  Vec3 e2 = cross(dir, e1);
  double v11 = quad_form(mom.cov, e1, e1);
  double v22 = quad_form(mom.cov, e2, e2);
  double v12 = quad_form(mom.cov, e1, e2);
  WinelandReport rep;
  rep.var_min = eig2_min(v11, v22, v12);
  rep.mean_norm = mean_norm;
  rep.delta_phi_w = std::sqrt(std::max(rep.var_min, 0.0)) / mean_norm;
  rep.xi2 = n * rep.delta_phi_w * rep.delta_phi_w;
  // Angle of the minimal-variance axis in the (e1, e2) plane, wrapped to
  // (-pi/2, pi/2]; the major axis sits at (1/2) atan2(2 v12, v11 - v22).
  double theta_max = 0.5 * std::atan2(2.0 * v12, v11 - v22);
  double theta_min = theta_max + 0.5 * kPi;
  if (theta_min > 0.5 * kPi) theta_min -= kPi;
  rep.angle = theta_min;
  return rep;
}

double qfi(const DickeState& state) {
  return qfi_from_cov(moments(state).cov);
}

MetricsRow baseline_metrics(int n_electrons) {
  if (n_electrons < 1) throw DomainError("baseline_metrics requires N >= 1");
  DickeState st = coherent_state(n_electrons);
  WinelandReport w = wineland_metrics(st);
  double f = qfi(st);
  MetricsRow row;
  row.n_electrons = n_electrons;
  row.chi = 0.0;
  row.kind = SqueezerKind::none;
  row.delta_phi_w = w.delta_phi_w;
  row.delta_phi_f = 1.0 / std::sqrt(f);
  row.xi2 = w.xi2;
  row.fisher = f;
  row.sql = sql(n_electrons);
  row.heisenberg = heisenberg(n_electrons);
  return row;
}

MetricsRow oat_metrics(int n_electrons, double chi_int) {
  if (n_electrons < 2) throw DomainError("oat_metrics requires N >= 2");
  if (chi_int < 0.0 || !std::isfinite(chi_int)) {
    throw DomainError("oat_metrics requires chi_int >= 0");
  }
  DickeState st = oat_apply(coherent_state(n_electrons), OATConfig{chi_int});
  WinelandReport w = wineland_metrics(st);
  double f = qfi(st);
  MetricsRow row;
  row.n_electrons = n_electrons;
  row.chi = chi_int;
  row.kind = SqueezerKind::interaction;
  row.delta_phi_w = w.delta_phi_w;
  row.delta_phi_f = 1.0 / std::sqrt(f);
  row.xi2 = w.xi2;
  row.fisher = f;
  row.sql = sql(n_electrons);
  row.heisenberg = heisenberg(n_electrons);
  return row;
}

MetricsRow meas_metrics(int n_electrons, double chi_meas, MeasDetail* detail,
                        int workers) {
  if (n_electrons < 2) throw DomainError("meas_metrics requires N >= 2");
  if (chi_meas < 0.0 || !std::isfinite(chi_meas)) {
    throw DomainError("meas_metrics requires chi_meas >= 0");
  }
  const int n = n_electrons;
  MetricsRow row;
  row.n_electrons = n;
  row.chi = chi_meas;
  row.kind = SqueezerKind::measurement;
  row.sql = sql(n);
  row.heisenberg = heisenberg(n);

  if (chi_meas == 0.0) {
    // No measurement: the coherent input passes through unchanged.
    DickeState st = coherent_state(n);
    WinelandReport w = wineland_metrics(st);
    double f = qfi(st);
    row.delta_phi_w = w.delta_phi_w;
    row.delta_phi_f = 1.0 / std::sqrt(f);
    row.xi2 = w.xi2;
    row.fisher = f;
    if (detail) {
      *detail = MeasDetail{};
      detail->f_avg = f;
      detail->delta_phi_f_mean_bound = row.delta_phi_f;
      detail->delta_phi_f_mean_fisher = row.delta_phi_f;
      detail->quadrature_mass = 1.0;
    }
    return row;
  }

  const MeasConfig cfg{chi_meas};
  const DickeState input = coherent_state(n);
  const HQuadrature quad = h_quadrature(input, cfg);
  const int n_nodes = static_cast<int>(quad.nodes.size());
  std::vector<NodeTerms> terms(n_nodes);

  parallel_for(static_cast<std::size_t>(n_nodes), workers, [&](std::size_t i) {
    const double h = quad.nodes[i];
    const double wgt = quad.weights[i];
    double p = outcome_density(input, cfg, h);
    NodeTerms t;
    if (p >= 1e-300) {
      MeasOutcome out = kraus_apply(input, cfg, h);
      SpinMoments mom = moments(out.post_state);
      double f = qfi_from_cov(mom.cov);
      t.mass = p * wgt;
      t.f_term = t.mass * f;
      t.fr_term = t.mass / std::sqrt(f);
      // Readout frame: the interferometer measures counts (z) against the
      // equatorial mean; the usable squeezing is the minimal variance in the
      // plane spanned by z and the equatorial direction orthogonal to the
      // mean azimuth, referenced to the equatorial mean length.
      double m_eq = std::hypot(mom.mean[0], mom.mean[1]);
      if (m_eq > 1e-9 * n) {
        double az = std::atan2(mom.mean[1], mom.mean[0]);
        Vec3 yp = {-std::sin(az), std::cos(az), 0.0};
        Vec3 zhat = {0.0, 0.0, 1.0};
        double v11 = quad_form(mom.cov, yp, yp);
        double v22 = quad_form(mom.cov, zhat, zhat);
        double v12 = quad_form(mom.cov, yp, zhat);
        double var_min = std::max(eig2_min(v11, v22, v12), 0.0);
        t.mass_w = t.mass;
        t.xi_term = t.mass * n * var_min / (m_eq * m_eq);
      }
    }
    terms[i] = t;
  });

  double mass = 0.0, mass_w = 0.0, xi_sum = 0.0, f_sum = 0.0, fr_sum = 0.0;
  int used = 0;
  for (const NodeTerms& t : terms) {
    mass += t.mass;
    mass_w += t.mass_w;
    xi_sum += t.xi_term;
    f_sum += t.f_term;
    fr_sum += t.fr_term;
    if (t.mass_w > 0.0) ++used;
  }
  if (std::abs(mass - 1.0) > 1e-6) {
    throw NumericalError("outcome quadrature mass " + std::to_string(mass) +
                         " deviates from 1 by more than 1e-6");
  }
  if (std::abs(mass_w - 1.0) > 1e-6) {
    throw NumericalError("mass of non-degenerate outcomes " +
                         std::to_string(mass_w) +
                         " deviates from 1 by more than 1e-6");
  }

  row.xi2 = xi_sum / mass_w;
  row.delta_phi_w = std::sqrt(row.xi2 / n);
  row.fisher = f_sum;
  row.delta_phi_f = fr_sum;
  if (detail) {
    detail->f_avg = f_sum;
    detail->delta_phi_f_mean_bound = fr_sum;
    detail->delta_phi_f_mean_fisher = 1.0 / std::sqrt(f_sum);
    detail->jensen_gap = fr_sum - detail->delta_phi_f_mean_fisher;
    detail->quadrature_mass = mass;
    detail->nodes_used = used;
    detail->nodes_total = n_nodes;
  }
  return row;
}

AnalyticFisher analytic_meas_fisher(int n_electrons, double chi_meas) {
  if (n_electrons < 1) throw DomainError("analytic_meas_fisher requires N >= 1");
  if (chi_meas < 0.0 || !std::isfinite(chi_meas)) {
    throw DomainError("analytic_meas_fisher requires chi_meas >= 0");
  }
  double n = n_electrons;
  double f = n + 0.5 * (n * n - n) * (1.0 - std::exp(-chi_meas));
  return {f, 1.0 / std::sqrt(f)};
}

OptimumReport optimize_chi(int n_electrons, SqueezerKind kind, int workers) {
  if (n_electrons < 2) throw DomainError("optimize_chi requires N >= 2");
  if (kind == SqueezerKind::none) {
    throw DomainError("optimize_chi requires a squeezer kind");
  }
  const bool interaction = (kind == SqueezerKind::interaction);
  const double lo = interaction ? 1e-4 : 1e-3;
  const double hi = interaction ? kPi : 20.0;

  int evaluations = 0;
  double best_chi = 0.0;
  double best_val = std::numeric_limits<double>::infinity();
  auto objective = [&](double chi) {
    ++evaluations;
    double val;
    if (interaction) {
      try {
        val = oat_metrics(n_electrons, chi).delta_phi_w;
      } catch (const NumericalError&) {
        // Oversqueezed states lose their mean spin; treat as unusable.
        val = std::numeric_limits<double>::infinity();
      }
    } else {
      val = meas_metrics(n_electrons, chi, nullptr, workers).delta_phi_w;
    }
    if (val < best_val) {
      best_val = val;
      best_chi = chi;
    }
    return val;
  };

  // Coarse log-spaced scan to bracket the interior minimum.
  constexpr int kCoarse = 17;
  std::array<double, kCoarse> grid, vals;
  double log_lo = std::log(lo), log_hi = std::log(hi);
  for (int i = 0; i < kCoarse; ++i) {
    grid[i] = std::exp(log_lo + (log_hi - log_lo) * i / (kCoarse - 1));
    vals[i] = objective(grid[i]);
  }
  int i_min = 0;
  for (int i = 1; i < kCoarse; ++i) {
    if (vals[i] < vals[i_min]) i_min = i;
  }
  if (i_min == 0 || i_min == kCoarse - 1) {
    throw NumericalError(
        "optimizer bracket error: no interior minimum of delta_phi_w in chi "
        "bracket");
  }

  // Golden-section refinement on log chi to relative tolerance 1e-4.
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = std::log(grid[i_min - 1]);
  double b = std::log(grid[i_min + 1]);
  double x1 = b - gr * (b - a);
  double x2 = a + gr * (b - a);
  double f1 = objective(std::exp(x1));
  double f2 = objective(std::exp(x2));
  while (b - a > 1e-4) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = objective(std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = objective(std::exp(x2));
    }
  }

  OptimumReport rep;
  rep.chi_opt = best_chi;
  rep.delta_phi_w_min = best_val;
  rep.evaluations = evaluations;
  rep.bracket = {lo, hi};
  return rep;
}

ScalingFit scaling_fit(SqueezerKind kind, ScalingMetric metric,
                       const std::vector<int>& n_list, double series_chi,
                       int workers) {
  std::set<int> distinct(n_list.begin(), n_list.end());
  if (distinct.size() < 4) {
    throw DomainError("scaling_fit requires >= 4 distinct N values");
  }
  int n_min = *distinct.begin();
  int n_max = *distinct.rbegin();
  if (n_min < 2) throw DomainError("scaling_fit requires N >= 2");
  if (static_cast<double>(n_max) < 10.0 * n_min) {
    throw DomainError("scaling_fit N values must span at least one decade");
  }
  if (metric != ScalingMetric::sql_baseline && kind == SqueezerKind::none) {
    throw DomainError("baseline squeezer has no strength to optimize");
  }

  ScalingFit fit;
  fit.n_values.assign(distinct.begin(), distinct.end());
  const int m = static_cast<int>(fit.n_values.size());
  fit.metric_values.assign(m, 0.0);

  double chi_series = 0.0;
  if (metric == ScalingMetric::delta_phi_f_fixed_chi) {
    chi_series =
        series_chi > 0.0 ? series_chi : optimize_chi(20, kind, workers).chi_opt;
    fit.series_chi = chi_series;
  }

  for (int i = 0; i < m; ++i) {
    int n = fit.n_values[i];
    switch (metric) {
      case ScalingMetric::xi2_at_opt: {
        OptimumReport opt = optimize_chi(n, kind, workers);
        fit.metric_values[i] = n * opt.delta_phi_w_min * opt.delta_phi_w_min;
        break;
      }
      case ScalingMetric::delta_phi_f_fixed_chi: {
        MetricsRow row = (kind == SqueezerKind::interaction)
                             ? oat_metrics(n, chi_series)
                             : meas_metrics(n, chi_series, nullptr, workers);
        fit.metric_values[i] = row.delta_phi_f;
        break;
      }
      case ScalingMetric::sql_baseline:
        fit.metric_values[i] = sql(n);
        break;
    }
  }

  // Least squares on (log N, log metric).
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < m; ++i) {
    double x = std::log(static_cast<double>(fit.n_values[i]));
    double y = std::log(fit.metric_values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double denom = m * sxx - sx * sx;
  fit.slope = (m * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / m;
  double ss = 0.0;
  for (int i = 0; i < m; ++i) {
    double x = std::log(static_cast<double>(fit.n_values[i]));
    double y = std::log(fit.metric_values[i]);
    double r = y - (fit.intercept + fit.slope * x);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / m);
  return fit;
}

double readout_align_angle(const DickeState& state) {
  SpinMoments mom = moments(state);
  double vy = mom.cov[1][1];
  double vz = mom.cov[2][2];
  double cyz = mom.cov[1][2];
  double beta = 0.5 * std::atan2(2.0 * cyz, vy - vz);
  // Var(S_y) after rotate(state, X, theta) equals the variance along
  // (0, cos theta, -sin theta) of the unrotated state.
  std::array<double, 4> candidates = {beta, beta + 0.5 * kPi, -beta,
                                      0.5 * kPi - beta};
  double best_angle = candidates[0];
  double best_var = std::numeric_limits<double>::infinity();
  for (double theta : candidates) {
    double v =
        variance_along(mom, {0.0, std::cos(theta), -std::sin(theta)});
    if (v < best_var) {
      best_var = v;
      best_angle = theta;
    }
  }
  return best_angle;
}

}  // namespace spinsq
