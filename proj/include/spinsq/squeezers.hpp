#pragma once

// Squeezing channels acting between the beamsplitters: one-axis twisting
// (interaction squeezer) and the Gaussian-count quantum non-demolition
// measurement (measurement squeezer), plus the quadrature grid used to
// average over measurement outcomes.

#include <random>
#include <vector>

#include "spinsq/dicke.hpp"

namespace spinsq {

enum class SqueezerKind { none, interaction, measurement };

struct OATConfig {
  double chi_int = 0.0;
};

struct MeasConfig {
  double chi_meas = 0.0;
  // Detector resolution of the count readout, p(h|k) = Normal(k, sigma).
  double sigma() const { return 1.0 / std::sqrt(2.0 * chi_meas); }
};

// Generic squeezer selector used by the interferometer and the CLI.
// chi is chi_int for interaction, chi_meas for measurement, ignored for none.
struct SqueezerConfig {
  SqueezerKind kind = SqueezerKind::none;
  double chi = 0.0;
};

struct MeasOutcome {
  double h = 0.0;           // measured count, real-valued (detector noise)
  double density = 0.0;     // p(h), probability density per unit h
  DickeState post_state;    // normalized post-measurement state
};

// Uniform trapezoid grid over measurement outcomes h.
struct HQuadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Rotation that maps the chi = pi twisted cat onto the +-z poles, where the
// z-basis parity readout picks up the N-fold phase fringe. The cat lies along
// x for even N and along y for odd N, hence the axis depends on parity.
struct FrameRotation {
  Axis axis = Axis::Y;
  double angle = 0.0;
};

// Diagonal phase evolution exp(-i chi_int m_k^2 / 2); unitary, O(N).
DickeState oat_apply(const DickeState& state, const OATConfig& cfg);

// Closed-form angle between the minimal-variance direction of the twisted
// state and the z axis, delta = (1/2) atan2(B, A) with
//   A = 1 - cos^(N-2)(chi),  B = 4 sin(chi/2) cos^(N-2)(chi/2),
// branch restricted to [0, pi/2]; chi -> 0 limit is pi/4.
double oat_tilt_delta(int n_electrons, double chi);

// Rotation angle about the mean-spin axis (+x after the first beamsplitter)
// that brings the minimal-variance direction onto the y axis, i.e. aligns the
// squeezed quadrature with the interferometer's sensitive direction.
double oat_alignment_angle(int n_electrons, double chi);

// Gaussian Kraus update for result h: b_k = (chi/pi)^(1/4) exp(-chi (k-h)^2/2)
// a_k, density p(h) = sum |b_k|^2, post state b/sqrt(p). The prefactor makes
// integral p(h) dh = 1 with no post-hoc renormalization.
MeasOutcome kraus_apply(const DickeState& state, const MeasConfig& cfg,
                        double h);

// p(h) = sqrt(chi/pi) sum_k |a_k|^2 exp(-chi (k-h)^2) without building the
// posterior.
double outcome_density(const DickeState& state, const MeasConfig& cfg,
                       double h);

// Draws h from p(h) exactly: k from the number distribution, then
// h ~ Normal(k, sigma). Returns the full kraus_apply outcome.
MeasOutcome sample_outcome(const DickeState& state, const MeasConfig& cfg,
                           std::mt19937_64& rng);

// Trapezoid rule on [-6 sigma, N + 6 sigma] with spacing <= min(sigma, 1)/8,
// fine enough for both the Gaussian width and the unit comb of count peaks.
HQuadrature h_quadrature(const DickeState& state, const MeasConfig& cfg);

FrameRotation oat_cat_frame(int n_electrons);

}  // namespace spinsq
