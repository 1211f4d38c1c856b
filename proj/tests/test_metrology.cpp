#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "spinsq/dicke.hpp"
#include "spinsq/errors.hpp"
#include "spinsq/metrology.hpp"
#include "spinsq/squeezers.hpp"

using namespace spinsq;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("sql and heisenberg limits") {
  CHECK(sql(1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sql(40) == doctest::Approx(0.15811388300841897).epsilon(1e-14));
  CHECK(sql(2000) == doctest::Approx(0.022360679774997897).epsilon(1e-14));
  CHECK(heisenberg(1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(heisenberg(40) == doctest::Approx(0.025).epsilon(1e-15));
  for (int n : {2, 17, 500}) CHECK(heisenberg(n) < sql(n));
  CHECK_THROWS_AS(sql(0), DomainError);
  CHECK_THROWS_AS(heisenberg(0), DomainError);
}

TEST_CASE("wineland_metrics of the coherent state sits at the SQL") {
  for (int n : {2, 12, 100}) {
    WinelandReport rep = wineland_metrics(coherent_state(n));
    CHECK(rep.xi2 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.delta_phi_w == doctest::Approx(sql(n)).epsilon(1e-9));
    CHECK(rep.var_min == doctest::Approx(0.25 * n).epsilon(1e-9));
    CHECK(rep.mean_norm == doctest::Approx(0.5 * n).epsilon(1e-12));
  }
}

TEST_CASE("wineland_metrics rejects mean-degenerate states") {
  DickeState ghz = oat_apply(coherent_state(10), OATConfig{kPi});
  CHECK_THROWS_AS(wineland_metrics(ghz), NumericalError);
}

TEST_CASE("qfi of reference states") {
  for (int n : {2, 4, 10, 20}) {
    CHECK(qfi(coherent_state(n)) ==
          doctest::Approx(static_cast<double>(n)).epsilon(1e-9));
    DickeState ghz = oat_apply(coherent_state(n), OATConfig{kPi});
    CHECK(qfi(ghz) ==
          doctest::Approx(static_cast<double>(n) * n).epsilon(1e-9));
  }
  for (int n : {4, 10}) {
    // Equal-arm Dicke state: F = N^2/2 + N.
    CHECK(qfi(basis_state(n, n / 2)) ==
          doctest::Approx(0.5 * n * n + n).epsilon(1e-9));
  }
}

TEST_CASE("baseline_metrics is the unsqueezed reference row") {
  MetricsRow row = baseline_metrics(25);
  CHECK(row.kind == SqueezerKind::none);
  CHECK(row.delta_phi_w == doctest::Approx(sql(25)).epsilon(1e-12));
  CHECK(row.delta_phi_f == doctest::Approx(sql(25)).epsilon(1e-12));
  CHECK(row.xi2 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(row.fisher == doctest::Approx(25.0).epsilon(1e-9));
  CHECK(row.sql == doctest::Approx(sql(25)).epsilon(1e-15));
  CHECK(row.heisenberg == doctest::Approx(1.0 / 25.0).epsilon(1e-15));
}

TEST_CASE("oat_metrics reference values") {
  MetricsRow a = oat_metrics(40, 0.122);
  CHECK(std::abs(a.delta_phi_w - 0.06265) < 1e-5);
  CHECK(a.xi2 == doctest::Approx(40.0 * a.delta_phi_w * a.delta_phi_w)
                     .epsilon(1e-12));
  CHECK(a.delta_phi_f <= a.delta_phi_w + 1e-12);
  CHECK(a.fisher > 40.0);

  MetricsRow b = oat_metrics(40, 0.177);
  CHECK(std::abs(b.delta_phi_w - 0.055242) < 2e-5);

  MetricsRow big = oat_metrics(2000, 0.015);
  CHECK(std::abs(big.delta_phi_w - 0.00191) < 2e-5);
  CHECK(big.delta_phi_w < sql(2000));
}

TEST_CASE("zero strength coincides with the baseline for both squeezers") {
  for (int n : {3, 25}) {
    MetricsRow base = baseline_metrics(n);
    for (MetricsRow row : {oat_metrics(n, 0.0), meas_metrics(n, 0.0)}) {
      CHECK(std::abs(row.delta_phi_w - base.delta_phi_w) < 1e-9 * base.delta_phi_w);
      CHECK(std::abs(row.delta_phi_f - base.delta_phi_f) < 1e-9 * base.delta_phi_f);
      CHECK(std::abs(row.xi2 - 1.0) < 1e-9);
      CHECK(std::abs(row.fisher - n) < 1e-9 * n);
    }
  }
}

TEST_CASE("uncertainty hierarchy holds across kinds and strengths") {
  for (double chi : {0.05, 0.1, 0.2, 0.4}) {
    MetricsRow row = oat_metrics(30, chi);
    CHECK(row.heisenberg <= row.delta_phi_f * (1.0 + 1e-9));
    CHECK(row.delta_phi_f <= row.delta_phi_w * (1.0 + 1e-9));
  }
  for (double chi : {0.5, 2.0}) {
    MetricsRow row = meas_metrics(30, chi);
    CHECK(row.heisenberg <= row.delta_phi_f * (1.0 + 1e-9));
    CHECK(row.delta_phi_f <= row.delta_phi_w * (1.0 + 1e-9));
  }
}

TEST_CASE("meas_metrics reference point and diagnostics") {
  MeasDetail detail;
  MetricsRow row = meas_metrics(40, 2.06, &detail);
  CHECK(std::abs(row.delta_phi_w - 0.040) <= 0.003);
  CHECK(std::abs(row.delta_phi_w - 0.04063) < 5e-4);
  CHECK(std::abs(detail.quadrature_mass - 1.0) < 1e-6);
  CHECK(detail.nodes_used <= detail.nodes_total);
  CHECK(detail.nodes_used > 0);
  // Jensen: E[F^-1/2] >= (E[F])^-1/2.
  CHECK(detail.delta_phi_f_mean_bound >=
        detail.delta_phi_f_mean_fisher - 1e-12);
  CHECK(detail.jensen_gap >= -1e-12);
  CHECK(row.delta_phi_f == doctest::Approx(detail.delta_phi_f_mean_bound)
                               .epsilon(1e-12));
  CHECK(row.fisher == doctest::Approx(detail.f_avg).epsilon(1e-12));
}

TEST_CASE("outcome-averaged Fisher matches the closed form") {
  for (int n : {2, 10, 40}) {
    for (double chi : {0.1, 0.5, 2.0}) {
      MeasDetail detail;
      meas_metrics(n, chi, &detail);
      const double want = analytic_meas_fisher(n, chi).f_eff;
      CHECK(std::abs(detail.f_avg - want) <= 0.005 * want);
    }
  }
}

TEST_CASE("analytic_meas_fisher endpoints and example") {
  AnalyticFisher ex = analytic_meas_fisher(2, 1.0);
  CHECK(ex.f_eff == doctest::Approx(2.632120558828558).epsilon(1e-12));
  CHECK(ex.delta_phi_f == doctest::Approx(1.0 / std::sqrt(ex.f_eff))
                              .epsilon(1e-14));
  CHECK(analytic_meas_fisher(10, 0.0).delta_phi_f ==
        doctest::Approx(sql(10)).epsilon(1e-12));
  CHECK(analytic_meas_fisher(10, 1e9).f_eff ==
        doctest::Approx(55.0).epsilon(1e-9));
  CHECK_THROWS_AS(analytic_meas_fisher(0, 1.0), DomainError);
  CHECK_THROWS_AS(analytic_meas_fisher(10, -1.0), DomainError);
}

TEST_CASE("measurement delta_phi_w falls then rises with strength") {
  const int n = 100;
  std::vector<double> falling{0.01, 0.03, 0.1, 0.3, 1.0};
  double prev = meas_metrics(n, falling[0]).delta_phi_w;
  for (std::size_t i = 1; i < falling.size(); ++i) {
    const double cur = meas_metrics(n, falling[i]).delta_phi_w;
    CHECK(cur < prev);
    prev = cur;
  }
  std::vector<double> rising{10.0, 15.0, 20.0};
  prev = meas_metrics(n, rising[0]).delta_phi_w;
  for (std::size_t i = 1; i < rising.size(); ++i) {
    const double cur = meas_metrics(n, rising[i]).delta_phi_w;
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("optimize_chi finds the interaction optimum at N = 40") {
  OptimumReport rep = optimize_chi(40, SqueezerKind::interaction);
  CHECK(rep.chi_opt > rep.bracket[0]);
  CHECK(rep.chi_opt < rep.bracket[1]);
  CHECK(std::abs(rep.chi_opt - 0.17731) < 2e-3);
  CHECK(std::abs(rep.delta_phi_w_min - 0.055242) < 1e-4);
  CHECK(rep.evaluations > 10);
  // The reported minimum is consistent with a direct evaluation.
  CHECK(oat_metrics(40, rep.chi_opt).delta_phi_w ==
        doctest::Approx(rep.delta_phi_w_min).epsilon(1e-10));
}

TEST_CASE("optimize_chi finds the measurement optimum at N = 40") {
  OptimumReport rep = optimize_chi(40, SqueezerKind::measurement);
  CHECK(std::abs(rep.chi_opt - 2.0412) < 0.05);
  CHECK(std::abs(rep.delta_phi_w_min - 0.040631) < 1e-4);
}

TEST_CASE("optimal measurement strength stays order one across N") {
  for (int n : {20, 100}) {
    OptimumReport rep = optimize_chi(n, SqueezerKind::measurement);
    CHECK(rep.chi_opt >= 1.5);
    CHECK(rep.chi_opt <= 2.5);
  }
}

TEST_CASE("optimize_chi input guards") {
  CHECK_THROWS_AS(optimize_chi(1, SqueezerKind::interaction), DomainError);
  CHECK_THROWS_AS(optimize_chi(40, SqueezerKind::none), DomainError);
}

TEST_CASE("scaling_fit guards") {
  CHECK_THROWS_AS(scaling_fit(SqueezerKind::interaction,
                              ScalingMetric::xi2_at_opt, {50, 100, 200}),
                  DomainError);
  CHECK_THROWS_AS(scaling_fit(SqueezerKind::interaction,
                              ScalingMetric::xi2_at_opt, {50, 60, 70, 80}),
                  DomainError);
  CHECK_THROWS_AS(scaling_fit(SqueezerKind::none, ScalingMetric::xi2_at_opt,
                              {20, 50, 100, 200}),
                  DomainError);
}

TEST_CASE("scaling_fit recovers the exact SQL slope") {
  ScalingFit fit = scaling_fit(SqueezerKind::none, ScalingMetric::sql_baseline,
                               {20, 50, 100, 200, 500});
  CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(std::abs(fit.intercept) < 1e-12);
  CHECK(fit.residual < 1e-12);
  REQUIRE(fit.n_values.size() == 5);
  REQUIRE(fit.metric_values.size() == 5);
  CHECK(fit.n_values.front() == 20);
  CHECK(fit.n_values.back() == 500);
  CHECK(fit.metric_values[2] == doctest::Approx(sql(100)).epsilon(1e-12));
}

TEST_CASE("fixed-strength Fisher series scales as 1/N") {
  ScalingFit fit =
      scaling_fit(SqueezerKind::interaction, ScalingMetric::delta_phi_f_fixed_chi,
                  {50, 100, 200, 500, 1000, 2000});
  // The default series strength is the N = 20 interaction optimum.
  CHECK(std::abs(fit.series_chi - 0.2683) < 0.01);
  CHECK(std::abs(fit.slope - (-1.0)) <= 0.05);
  CHECK(fit.residual < 0.2);
}

TEST_CASE("optimal-strength squeezing parameter scales as N^(-2/3)") {
  ScalingFit fit = scaling_fit(SqueezerKind::interaction,
                               ScalingMetric::xi2_at_opt, {20, 50, 100, 200});
  CHECK(fit.slope > -0.8);
  CHECK(fit.slope < -0.55);
}

TEST_CASE("readout_align_angle matches a dense angle scan") {
  std::vector<DickeState> states;
  states.push_back(oat_apply(coherent_state(20), OATConfig{0.26}));
  states.push_back(
      kraus_apply(coherent_state(30), MeasConfig{1.5}, 14.3).post_state);
  states.push_back(
      kraus_apply(coherent_state(30), MeasConfig{1.5}, 15.7).post_state);
  for (const DickeState& st : states) {
    const double angle = readout_align_angle(st);
    const double got =
        moments(rotate(st, Axis::X, angle)).cov[1][1];
    double best = got;
    for (int i = 0; i <= 400; ++i) {
      const double theta = -0.5 * kPi + kPi * i / 400.0;
      best = std::min(best,
                      moments(rotate(st, Axis::X, theta)).cov[1][1]);
    }
    // Scan resolution limits the reference, so allow a tiny one-sided slack.
    CHECK(got <= best * (1.0 + 1e-4) + 1e-12);
    CHECK(got >= best * (1.0 - 1e-9) - 1e-12);
  }
}
