#include "spinsq/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spinsq/errors.hpp"

namespace spinsq {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kMaxWignerN = 100;

// log(n!) with a lazily grown table; all Racah factorial arguments are
// non-negative integers bounded by 2N + 1.
double log_fact(int n, std::vector<double>& table) {
  if (n < 0) throw DomainError("negative factorial argument");
  while (static_cast<int>(table.size()) <= n) {
    int m = static_cast<int>(table.size());
    table.push_back(table.back() + std::log(static_cast<double>(m)));
  }
  return table[n];
}

thread_local std::vector<double> g_log_fact{0.0};  // log(0!) = 0

// Fully normalized associated Legendre values P~_K^Q(cos theta) including the
// Condon-Shortley sign, so that Y_KQ = P~_K^Q(cos theta) exp(i Q phi).
// Fills table[K][Q] for 0 <= Q <= K <= kmax with the standard three-term
// recurrences (stable for K <= a few hundred).
void normalized_legendre(int kmax, double theta,
                         std::vector<std::vector<double>>& table) {
  double x = std::cos(theta);
  double s = std::sin(theta);
  table.assign(kmax + 1, {});
  for (int K = 0; K <= kmax; ++K) table[K].assign(K + 1, 0.0);
  table[0][0] = std::sqrt(1.0 / (4.0 * kPi));
  for (int Q = 1; Q <= kmax; ++Q) {
    // Sectoral term carries the Condon-Shortley (-1)^Q through the minus sign.
    table[Q][Q] = -std::sqrt((2.0 * Q + 1.0) / (2.0 * Q)) * s * table[Q - 1][Q - 1];
  }
  for (int Q = 0; Q < kmax; ++Q) {
    table[Q + 1][Q] = std::sqrt(2.0 * Q + 3.0) * x * table[Q][Q];
  }
  for (int Q = 0; Q <= kmax; ++Q) {
    for (int K = Q + 2; K <= kmax; ++K) {
      double a = std::sqrt((4.0 * K * K - 1.0) /
                           (static_cast<double>(K) * K - Q * Q));
      double b = std::sqrt((2.0 * K + 1.0) / (2.0 * K - 3.0) *
                           ((K - 1.0) * (K - 1.0) - Q * Q) /
                           (static_cast<double>(K) * K - Q * Q));
      table[K][Q] = a * x * table[K - 1][Q] - b * table[K - 2][Q];
    }
  }
}

}  // namespace

double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2,
                      int two_j, int two_m) {
  if (two_m1 + two_m2 != two_m) return 0.0;
  if (two_j < std::abs(two_j1 - two_j2) || two_j > two_j1 + two_j2) return 0.0;
  if ((two_j1 + two_j2 + two_j) % 2 != 0) return 0.0;
  if (std::abs(two_m1) > two_j1 || std::abs(two_m2) > two_j2 ||
      std::abs(two_m) > two_j) {
    return 0.0;
  }
  if ((two_j1 + two_m1) % 2 || (two_j2 + two_m2) % 2 || (two_j + two_m) % 2) {
    return 0.0;
  }
  auto half = [](int x) { return x / 2; };
  auto& lf = g_log_fact;
  const int p0 = half(two_j + two_j1 - two_j2);
  const int p1 = half(two_j - two_j1 + two_j2);
  const int p2 = half(two_j1 + two_j2 - two_j);
  const int p3 = half(two_j + two_m);
  const int p4 = half(two_j - two_m);
  const int p5 = half(two_j1 - two_m1);
  const int p6 = half(two_j1 + two_m1);
  const int p7 = half(two_j2 - two_m2);
  const int p8 = half(two_j2 + two_m2);
  double log_num =
      0.5 * (std::log(two_j + 1.0) + log_fact(p0, lf) + log_fact(p1, lf) +
             log_fact(p2, lf) - log_fact(half(two_j1 + two_j2 + two_j) + 1, lf) +
             log_fact(p3, lf) + log_fact(p4, lf) + log_fact(p5, lf) +
             log_fact(p6, lf) + log_fact(p7, lf) + log_fact(p8, lf));
  // Racah sum: s runs over all values keeping every factorial non-negative.
  const int g1 = half(two_j - two_j2 + two_m1);  // may be negative
  const int g2 = half(two_j - two_j1 - two_m2);  // may be negative
  int s_min = std::max(0, std::max(-g1, -g2));
  int s_max = std::min(p2, std::min(p5, p8));
  double total = 0.0;
  for (int s = s_min; s <= s_max; ++s) {
    double log_den = log_fact(s, lf) + log_fact(p2 - s, lf) +
                     log_fact(p5 - s, lf) + log_fact(p8 - s, lf) +
                     log_fact(g1 + s, lf) + log_fact(g2 + s, lf);
    double term = std::exp(log_num - log_den);
    total += (s % 2 == 0) ? term : -term;
  }
  return total;
}

SphereGrid make_sphere_grid(int n_theta, int n_phi) {
  if (n_theta < 2 || n_phi < 4) {
    throw DomainError("sphere grid needs n_theta >= 2 and n_phi >= 4");
  }
  SphereGrid grid;
  grid.theta.resize(n_theta);
  grid.phi_az.resize(n_phi);
  for (int i = 0; i < n_theta; ++i) grid.theta[i] = kPi * i / (n_theta - 1);
  for (int i = 0; i < n_phi; ++i) grid.phi_az[i] = 2.0 * kPi * i / n_phi;
  return grid;
}

void validate_grid(const SphereGrid& grid) {
  if (grid.theta.size() < 2 || grid.phi_az.size() < 4) {
    throw DomainError("sphere grid needs >= 2 polar and >= 4 azimuthal samples");
  }
  for (std::size_t i = 0; i < grid.theta.size(); ++i) {
    double t = grid.theta[i];
    if (!(t >= 0.0 && t <= kPi)) throw DomainError("theta outside [0, pi]");
    if (i > 0 && !(t > grid.theta[i - 1])) {
      throw DomainError("theta samples must be strictly increasing");
    }
  }
  for (std::size_t i = 0; i < grid.phi_az.size(); ++i) {
    double p = grid.phi_az[i];
    if (!(p >= 0.0 && p < 2.0 * kPi)) {
      throw DomainError("phi_az outside [0, 2*pi)");
    }
    if (i > 0 && !(p > grid.phi_az[i - 1])) {
      throw DomainError("phi_az samples must be strictly increasing");
    }
  }
}

std::vector<double> wigner_function(const DickeState& state,
                                    const SphereGrid& grid) {
  validate_grid(grid);
  const int n = state.n_electrons;
  if (n > kMaxWignerN) {
    throw DomainError("wigner_function supports N <= " +
                      std::to_string(kMaxWignerN) +
                      " (multipole table is O(N^3))");
  }
  const auto& a = state.amplitudes;

  // State multipoles rho_KQ = <psi| T_KQ^dagger |psi>. The multipole operator
  // connects column k to row k - Q, so
  //   rho_KQ = sum_k sqrt((2K+1)/(N+1)) CG(...) a[k-Q] conj(a[k]).
  // Stored as rho[K][Q + K] for Q in [-K, K].
  std::vector<std::vector<cplx>> rho(n + 1);
  for (int K = 0; K <= n; ++K) {
    rho[K].assign(2 * K + 1, cplx(0.0, 0.0));
    double scale = std::sqrt((2.0 * K + 1.0) / (n + 1.0));
    for (int Q = -K; Q <= K; ++Q) {
      cplx acc(0.0, 0.0);
      int k_lo = std::max(0, Q);
      int k_hi = std::min(n, n + Q);
      for (int k = k_lo; k <= k_hi; ++k) {
        double cg = clebsch_gordan(n, n - 2 * k, 2 * K, 2 * Q, n,
                                   n - 2 * (k - Q));
        if (cg != 0.0) acc += cg * a[k - Q] * std::conj(a[k]);
      }
      rho[K][Q + K] = scale * acc;
    }
  }

  // W(theta, phi) = sum_Q exp(i Q phi) g_Q(theta) with
  // g_Q(theta) = sum_K rho_KQ * (normalized Legendre factor of Y_KQ).
  const std::size_t n_th = grid.theta.size();
  const std::size_t n_ph = grid.phi_az.size();
  std::vector<double> field(n_th * n_ph, 0.0);
  double max_imag = 0.0;
  std::vector<std::vector<double>> leg;
  std::vector<cplx> gq(2 * n + 1);
  for (std::size_t it = 0; it < n_th; ++it) {
    normalized_legendre(n, grid.theta[it], leg);
    for (int Q = -n; Q <= n; ++Q) {
      int aq = std::abs(Q);
      cplx acc(0.0, 0.0);
      for (int K = aq; K <= n; ++K) {
        double p = leg[K][aq];
        if (Q < 0 && (aq % 2)) p = -p;  // Y_{K,-Q} = (-1)^Q conj(Y_KQ)
        acc += rho[K][Q + K] * p;
      }
      gq[Q + n] = acc;
    }
    for (std::size_t ip = 0; ip < n_ph; ++ip) {
      double phi = grid.phi_az[ip];
      cplx w(0.0, 0.0);
      for (int Q = -n; Q <= n; ++Q) {
        w += gq[Q + n] * std::polar(1.0, Q * phi);
      }
      max_imag = std::max(max_imag, std::abs(w.imag()));
      field[it * n_ph + ip] = w.real();
    }
  }
  if (max_imag > 1e-9) {
    throw NumericalError("Wigner field imaginary residue " +
                         std::to_string(max_imag) + " exceeds 1e-9");
  }
  return field;
}

double wigner_sphere_integral(int n) {
  return std::sqrt(4.0 * kPi / (n + 1.0));
}

}  // namespace spinsq
