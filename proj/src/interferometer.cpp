#include "spinsq/interferometer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "spinsq/errors.hpp"
#include "spinsq/metrology.hpp"
#include "spinsq/parallel.hpp"

namespace spinsq {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kCalibrationStep = 1e-4;
constexpr long long kShotBlock = 4096;

double mean_sz(const DickeState& st) {
  double s = 0.0;
  for (int k = 0; k < st.dim(); ++k) s += st.m(k) * std::norm(st.amplitudes[k]);
  return s;
}

DickeState pre_squeezer_state(int n) {
  return rotate(basis_state(n, 0), Axis::Y, 0.5 * kPi);
}

// Squeezer stage including the optional alignment rotation.
DickeState apply_squeezer(const DickeState& st, const MZISpec& spec,
                          const std::optional<double>& h) {
  const SqueezerConfig& sq = spec.squeezer;
  switch (sq.kind) {
    case SqueezerKind::none:
      return st;
    case SqueezerKind::interaction: {
      DickeState out = oat_apply(st, OATConfig{sq.chi});
      if (spec.apply_alignment && spec.n_electrons >= 2 && sq.chi > 0.0) {
        if (std::abs(sq.chi - kPi) <= 1e-12) {
          FrameRotation fr = oat_cat_frame(spec.n_electrons);
          out = rotate(out, fr.axis, fr.angle);
        } else {
          out = rotate(out, Axis::X,
                       oat_alignment_angle(spec.n_electrons, sq.chi));
        }
      }
      return out;
    }
    case SqueezerKind::measurement: {
      if (sq.chi == 0.0) return st;  // no-op squeezer
      if (!h) {
        throw DomainError(
            "measurement squeezer requires a mid-circuit outcome h");
      }
      MeasOutcome out = kraus_apply(st, MeasConfig{sq.chi}, *h);
      DickeState post = std::move(out.post_state);
      if (spec.apply_alignment) {
        post = rotate(post, Axis::X, readout_align_angle(post));
      }
      return post;
    }
  }
  throw DomainError("unknown squeezer kind");
}

DickeState apply_phase_and_bs2(const DickeState& st, double phi) {
  return rotate(phase_shift(st, phi), Axis::X, 0.5 * kPi);
}

// Final mean S_z for the given sample phase, sharing the squeezed state.
double final_mean_sz(const DickeState& squeezed, double phi) {
  return mean_sz(apply_phase_and_bs2(squeezed, phi));
}

Calibration calibrate_squeezed(const DickeState& squeezed) {
  Calibration cal;
  cal.offset = final_mean_sz(squeezed, 0.0);
  cal.slope = (final_mean_sz(squeezed, kCalibrationStep) -
               final_mean_sz(squeezed, -kCalibrationStep)) /
              (2.0 * kCalibrationStep);
  if (std::abs(cal.slope) <= 1e-9) {
    throw NumericalError("uninformative readout: |slope| <= 1e-9");
  }
  return cal;
}

double lerp_at(const std::vector<double>& xs, const std::vector<double>& ys,
               double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t i = static_cast<std::size_t>(it - xs.begin());
  double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return ys[i - 1] + t * (ys[i] - ys[i - 1]);
}

struct BlockSums {
  double d1 = 0.0;  // sum of (phi_hat - phi_true)
  double d2 = 0.0;  // sum of squares
  double d4 = 0.0;  // sum of fourth powers
};

}  // namespace

void validate(const MZISpec& spec) {
  if (spec.n_electrons < 1) throw DomainError("MZISpec requires N >= 1");
  if (!(std::abs(spec.true_phase) < 0.5 * kPi)) {
    throw DomainError("MZISpec requires |true_phase| < pi/2");
  }
  if (spec.squeezer.chi < 0.0 || !std::isfinite(spec.squeezer.chi)) {
    throw DomainError("squeezer strength must be finite and >= 0");
  }
}

DickeState run_pipeline(const MZISpec& spec, std::optional<double> h) {
  validate(spec);
  DickeState st = pre_squeezer_state(spec.n_electrons);
  st = apply_squeezer(st, spec, h);
  return apply_phase_and_bs2(st, spec.true_phase);
}

ArcsinEstimate estimator_arcsin(int n_left, int n_right, int n_electrons) {
  if (n_electrons < 1) throw DomainError("estimator_arcsin requires N >= 1");
  if (n_left < 0 || n_right < 0 ||
      std::abs(n_left - n_right) > n_electrons) {
    throw DomainError("estimator_arcsin: counts out of range");
  }
  double x = static_cast<double>(n_left - n_right) / n_electrons;
  ArcsinEstimate est;
  est.clamped = (x < -1.0 || x > 1.0);
  est.phi_hat = std::asin(std::clamp(x, -1.0, 1.0));
  return est;
}

Calibration calibrate(const MZISpec& spec, std::optional<double> h) {
  validate(spec);
  DickeState squeezed =
      apply_squeezer(pre_squeezer_state(spec.n_electrons), spec, h);
  return calibrate_squeezed(squeezed);
}

MonteCarloReport monte_carlo(const MZISpec& spec, long long shots,
                             std::uint64_t seed, int workers,
                             std::vector<ShotRecord>* records) {
  validate(spec);
  if (shots < 1) throw DomainError("monte_carlo requires shots >= 1");
  const int n = spec.n_electrons;
  const double phi_true = spec.true_phase;
  const bool with_h = (spec.squeezer.kind == SqueezerKind::measurement &&
                       spec.squeezer.chi > 0.0);

  if (records) records->assign(static_cast<std::size_t>(shots), ShotRecord{});
  const long long n_blocks = (shots + kShotBlock - 1) / kShotBlock;
  std::vector<BlockSums> sums(static_cast<std::size_t>(n_blocks));

  if (!with_h) {
    // Deterministic circuit: one final distribution and one calibration.
    DickeState squeezed =
        apply_squeezer(pre_squeezer_state(n), spec, std::nullopt);
    Calibration cal = calibrate_squeezed(squeezed);
    std::vector<double> pk =
        number_distribution(apply_phase_and_bs2(squeezed, phi_true));

    parallel_for(static_cast<std::size_t>(n_blocks), workers,
                 [&](std::size_t b) {
      std::mt19937_64 rng(stream_seed(seed, b));
      std::discrete_distribution<int> pick(pk.begin(), pk.end());
      long long lo = static_cast<long long>(b) * kShotBlock;
      long long hi = std::min(shots, lo + kShotBlock);
      BlockSums bs;
      for (long long i = lo; i < hi; ++i) {
        int k = pick(rng);
        double sz = 0.5 * n - k;
        double phi_hat = (sz - cal.offset) / cal.slope;
        double d = phi_hat - phi_true;
        bs.d1 += d;
        bs.d2 += d * d;
        bs.d4 += d * d * d * d;
        if (records) {
          (*records)[static_cast<std::size_t>(i)] =
              ShotRecord{std::nullopt, n - k, k, phi_hat};
        }
      }
      sums[b] = bs;
    });
  } else {
    const MeasConfig cfg{spec.squeezer.chi};
    const double sigma = cfg.sigma();
    const DickeState pre = pre_squeezer_state(n);
    const std::vector<double> pk_pre = number_distribution(pre);

    // Per-outcome calibration on the quadrature grid, interpolated per shot.
    const HQuadrature quad = h_quadrature(pre, cfg);
    const std::size_t n_nodes = quad.nodes.size();
    std::vector<double> mu0(n_nodes), slope(n_nodes);
    parallel_for(n_nodes, workers, [&](std::size_t i) {
      DickeState squeezed = apply_squeezer(pre, spec, quad.nodes[i]);
      mu0[i] = final_mean_sz(squeezed, 0.0);
      slope[i] = (final_mean_sz(squeezed, kCalibrationStep) -
                  final_mean_sz(squeezed, -kCalibrationStep)) /
                 (2.0 * kCalibrationStep);
    });

    parallel_for(static_cast<std::size_t>(n_blocks), workers,
                 [&](std::size_t b) {
      std::mt19937_64 rng(stream_seed(seed, b));
      std::discrete_distribution<int> pick_k(pk_pre.begin(), pk_pre.end());
      std::normal_distribution<double> unit_normal(0.0, 1.0);
      long long lo = static_cast<long long>(b) * kShotBlock;
      long long hi = std::min(shots, lo + kShotBlock);
      BlockSums bs;
      for (long long i = lo; i < hi; ++i) {
        double h = pick_k(rng) + sigma * unit_normal(rng);
        DickeState squeezed = apply_squeezer(pre, spec, h);
        std::vector<double> pk =
            number_distribution(apply_phase_and_bs2(squeezed, phi_true));
        std::discrete_distribution<int> pick(pk.begin(), pk.end());
        int k = pick(rng);
        double sz = 0.5 * n - k;
        double s = lerp_at(quad.nodes, slope, h);
        if (std::abs(s) <= 1e-9) {
          throw NumericalError("uninformative readout at h=" +
                               std::to_string(h));
        }
        double phi_hat = (sz - lerp_at(quad.nodes, mu0, h)) / s;
        double d = phi_hat - phi_true;
        bs.d1 += d;
        bs.d2 += d * d;
        bs.d4 += d * d * d * d;
        if (records) {
          (*records)[static_cast<std::size_t>(i)] =
              ShotRecord{h, n - k, k, phi_hat};
        }
      }
      sums[b] = bs;
    });
  }

  double d1 = 0.0, d2 = 0.0, d4 = 0.0;
  for (const BlockSums& bs : sums) {
    d1 += bs.d1;
    d2 += bs.d2;
    d4 += bs.d4;
  }
  const double m = static_cast<double>(shots);
  MonteCarloReport rep;
  rep.shots = shots;
  rep.bias = d1 / m;
  double ms = d2 / m;
  rep.rms_error = std::sqrt(ms);
  // Delta method: Var(rms) ~ Var(mean square) / (4 ms).
  double var_ms = std::max(d4 / m - ms * ms, 0.0) / m;
  rep.std_error = rep.rms_error > 0.0
                      ? 0.5 * std::sqrt(var_ms) / rep.rms_error
                      : 0.0;
  return rep;
}

double parity_expectation(const MZISpec& spec) {
  if (spec.squeezer.kind != SqueezerKind::interaction ||
      std::abs(spec.squeezer.chi - kPi) > 1e-12) {
    throw DomainError(
        "parity_expectation requires the interaction squeezer at chi = pi");
  }
  std::vector<double> pk = number_distribution(run_pipeline(spec));
  double p = 0.0;
  for (std::size_t k = 0; k < pk.size(); ++k) {
    p += (k % 2 == 0) ? pk[k] : -pk[k];
  }
  return p;
}

double parity_fisher(int n_electrons, double phi) {
  MZISpec spec;
  spec.n_electrons = n_electrons;
  spec.squeezer = {SqueezerKind::interaction, kPi};
  spec.apply_alignment = true;
  constexpr double eps = 1e-5;
  auto at = [&](double x) {
    MZISpec s = spec;
    s.true_phase = x;
    return parity_expectation(s);
  };
  double p = at(phi);
  double dp = (at(phi + eps) - at(phi - eps)) / (2.0 * eps);
  double denom = std::max(1.0 - p * p, 0.0);
  if (denom < 1e-12) return 0.0;
  return dp * dp / denom;
}

double parity_phase_uncertainty(int n_electrons) {
  if (n_electrons < 1) {
    throw DomainError("parity_phase_uncertainty requires N >= 1");
  }
  // The parity fringe is a pure cosine in phi, so the Fisher information is
  // constant along it except at removable degenerate points; a scan over the
  // estimator domain finds the steepest-point uncertainty directly.
  constexpr int kScan = 64;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kScan; ++i) {
    double phi = 0.9 * kPi * (i + 0.5) / kScan - 0.45 * kPi;
    double f = parity_fisher(n_electrons, phi);
    if (f > 0.0) best = std::min(best, 1.0 / std::sqrt(f));
  }
  return best;
}

}  // namespace spinsq
