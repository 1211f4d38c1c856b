#pragma once

// Phase-uncertainty figures of merit: Wineland squeezing parameter and
// Delta-phi_W, quantum Fisher information and Delta-phi_F, measurement-
// averaged metrics over the outcome quadrature, the analytic measurement
// Fisher formula, squeezing-strength optimization, and scaling-law fits.

#include <array>
#include <vector>

#include "spinsq/dicke.hpp"
#include "spinsq/squeezers.hpp"

namespace spinsq {

// Shot-noise and Heisenberg phase-uncertainty limits.
double sql(int n_electrons);
double heisenberg(int n_electrons);

struct WinelandReport {
  double xi2 = 0.0;          // N * delta_phi_w^2
  double delta_phi_w = 0.0;  // sqrt(var_min) / |mean spin|
  double angle = 0.0;        // in-plane angle of the minimal-variance axis
  double var_min = 0.0;      // smaller transverse covariance eigenvalue
  double mean_norm = 0.0;    // |<S>|
};

// Transverse-frame squeezing metrics. Builds the orthonormal frame around the
// mean-spin direction, diagonalizes the 2x2 transverse covariance block, and
// reports the minimal variance. Throws NumericalError when the mean spin is
// degenerate (|<S>| <= 1e-9 N), e.g. for GHZ states; use qfi there instead.
WinelandReport wineland_metrics(const DickeState& state);

// Pure-state quantum Fisher information maximized over rotation generators,
// F = 4 * lambda_max(covariance). Frame independent, finite for GHZ states.
double qfi(const DickeState& state);

// One sweep point. delta_phi_f is the Fisher bound (for the measurement
// squeezer, the outcome-averaged integral of F(h)^(-1/2)); fisher is the QFI
// (outcome-averaged for the measurement squeezer).
struct MetricsRow {
  int n_electrons = 0;
  double chi = 0.0;
  SqueezerKind kind = SqueezerKind::none;
  double delta_phi_w = 0.0;
  double delta_phi_f = 0.0;
  double xi2 = 0.0;
  double fisher = 0.0;
  double sql = 0.0;
  double heisenberg = 0.0;
};

// Extra diagnostics of the measurement-squeezer average. The two Fisher-bound
// definitions (integral of p F^(-1/2) versus (integral of p F)^(-1/2)) differ
// by a Jensen gap at intermediate chi; both are reported.
struct MeasDetail {
  double f_avg = 0.0;
  double delta_phi_f_mean_bound = 0.0;
  double delta_phi_f_mean_fisher = 0.0;
  double jensen_gap = 0.0;
  double quadrature_mass = 0.0;  // integral of p(h) dh over the grid
  int nodes_used = 0;            // nodes with a non-degenerate mean spin
  int nodes_total = 0;
};

MetricsRow baseline_metrics(int n_electrons);
MetricsRow oat_metrics(int n_electrons, double chi_int);
MetricsRow meas_metrics(int n_electrons, double chi_meas,
                        MeasDetail* detail = nullptr, int workers = 0);

struct AnalyticFisher {
  double f_eff = 0.0;
  double delta_phi_f = 0.0;
};

// Closed form F_eff = N + (N^2 - N)/2 * (1 - exp(-chi_meas)).
AnalyticFisher analytic_meas_fisher(int n_electrons, double chi_meas);

struct OptimumReport {
  double chi_opt = 0.0;
  double delta_phi_w_min = 0.0;
  int evaluations = 0;
  std::array<double, 2> bracket{0.0, 0.0};
};

// Minimizes delta_phi_w over chi by golden-section search on log chi.
// Brackets: interaction [1e-4, pi], measurement [1e-3, 20]. Throws
// NumericalError if the coarse scan finds no interior minimum.
OptimumReport optimize_chi(int n_electrons, SqueezerKind kind, int workers = 0);

enum class ScalingMetric {
  xi2_at_opt,             // xi^2 at the per-N optimal chi
  delta_phi_f_fixed_chi,  // Fisher bound along a fixed-chi series
  sql_baseline,           // N^(-1/2), exact slope -1/2
};

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;   // rms log-space residual
  double series_chi = 0.0;  // chi of the fixed-chi series, 0 when unused
  std::vector<int> n_values;
  std::vector<double> metric_values;
};

// Least-squares fit of log(metric) vs log(N). Requires >= 4 distinct N
// spanning at least one decade. For delta_phi_f_fixed_chi the series strength
// defaults to the optimal chi of a reference batch (N = 20) so all N share
// one squeezer setting; pass series_chi > 0 to override.
ScalingFit scaling_fit(SqueezerKind kind, ScalingMetric metric,
                       const std::vector<int>& n_list, double series_chi = 0.0,
                       int workers = 0);

// Rotation angle about the x axis that minimizes Var(S_y) of the rotated
// state, used to align a squeezed quadrature with the interferometer's
// sensitive direction. Chosen among the covariance-ellipse candidates by
// direct evaluation, so it is robust to branch conventions.
double readout_align_angle(const DickeState& state);

}  // namespace spinsq
