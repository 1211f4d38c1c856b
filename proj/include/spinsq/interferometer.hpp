#pragma once

// End-to-end Mach-Zehnder pipeline: beamsplitters, squeezer with optional
// alignment rotation, sample phase, and detection, plus phase estimators,
// per-outcome calibration, Monte Carlo shot simulation, and the parity
// readout of the fully twisted (cat) state.

#include <cstdint>
#include <optional>
#include <vector>

#include "spinsq/dicke.hpp"
#include "spinsq/squeezers.hpp"

namespace spinsq {

struct MZISpec {
  int n_electrons = 1;
  SqueezerConfig squeezer;
  double true_phase = 0.0;      // sample phase, |phi| < pi/2
  bool apply_alignment = true;  // rotate squeezed axis onto the readout axis
};

// One detected shot. h is only present for the measurement squeezer.
struct ShotRecord {
  std::optional<double> h;
  int n_left = 0;
  int n_right = 0;
  double phi_hat = 0.0;
};

// Linearized readout: phi_hat = (S_z_measured - offset) / slope.
struct Calibration {
  double offset = 0.0;  // expected final S_z at phi = 0
  double slope = 0.0;   // d<S_z_final>/dphi at phi = 0
};

struct ArcsinEstimate {
  double phi_hat = 0.0;
  bool clamped = false;
};

struct MonteCarloReport {
  double rms_error = 0.0;
  double bias = 0.0;
  double std_error = 0.0;  // standard error of the rms estimate
  long long shots = 0;
};

void validate(const MZISpec& spec);

// Applies, in order: BS1 = rotate(Y, pi/2) on basis_state(N, 0); the squeezer
// (with its alignment rotation when apply_alignment is set; the chi = pi
// twisted cat is instead rotated onto the poles, where parity readout works);
// phase_shift(true_phase); BS2 = rotate(X, pi/2). Returns the pre-detection
// state. The measurement squeezer requires the mid-circuit outcome h.
DickeState run_pipeline(const MZISpec& spec,
                        std::optional<double> h = std::nullopt);

// phi_hat = arcsin((n_L - n_R) / N), argument clamped to [-1, 1].
ArcsinEstimate estimator_arcsin(int n_left, int n_right, int n_electrons);

// offset = <S_z_final> at phi = 0; slope from the central difference over
// phi = +-1e-4. Throws NumericalError when |slope| <= 1e-9.
Calibration calibrate(const MZISpec& spec,
                      std::optional<double> h = std::nullopt);

// Simulates M shots: for the measurement squeezer, samples h mid-circuit and
// interpolates a per-h calibration precomputed on the outcome quadrature
// grid; then samples (n_L, n_R) from the final number distribution and
// estimates phi_hat = (S_z - offset(h)) / slope(h). Shot blocks draw from
// per-block RNG streams derived from (seed, block), so results do not depend
// on the worker count. Optionally appends every shot to `records`.
MonteCarloReport monte_carlo(const MZISpec& spec, long long shots,
                             std::uint64_t seed, int workers = 0,
                             std::vector<ShotRecord>* records = nullptr);

// <P> = sum_k (-1)^k p_k over the final number distribution. Requires the
// interaction squeezer at chi = pi (within 1e-12); with alignment enabled the
// fringe oscillates at angular frequency N in the sample phase.
double parity_expectation(const MZISpec& spec);

// Fisher information of the parity signal, |dP/dphi|^2 / (1 - P^2), by
// central difference at the given phase (alignment enabled).
double parity_fisher(int n_electrons, double phi);

// Minimal parity phase uncertainty sqrt(1 - P^2)/|dP/dphi| over one fringe
// period; reaches 1/N at the steepest point.
double parity_phase_uncertainty(int n_electrons);

}  // namespace spinsq
