#include "spinsq/physical.hpp"

#include <cmath>

#include "spinsq/errors.hpp"

namespace spinsq {

using namespace constants;

double beta_from_energy(double energy_kev) {
  if (energy_kev < 0.0 || !std::isfinite(energy_kev)) {
    throw DomainError("kinetic energy must be >= 0 keV");
  }
  double gamma = 1.0 + energy_kev / electron_rest_kev;
  return std::sqrt(1.0 - 1.0 / (gamma * gamma));
}

double mutual_capacitance(const ChannelGeometry& geom) {
  if (!(geom.length_m > 0.0)) throw DomainError("channel length must be > 0");
  if (!(geom.radius_m > 0.0) ||
      !(geom.separation_m > 2.0 * geom.radius_m)) {
    throw DomainError("channel geometry requires d > 2r > 0");
  }
  return geom.length_m * epsilon0_f_m * kPi /
         std::acosh(geom.separation_m / (2.0 * geom.radius_m));
}

double chi_int_cylindrical(double d_over_r, double energy_kev) {
  if (!(d_over_r > 2.0)) throw DomainError("chi_int requires d/r > 2");
  if (!(energy_kev > 0.0)) throw DomainError("chi_int requires E > 0");
  double beta = beta_from_energy(energy_kev);
  return 4.0 * (fine_structure / beta) * std::acosh(0.5 * d_over_r);
}

double chi_int_general(double length_m, double energy_kev,
                       double capacitance_f) {
  if (!(length_m > 0.0) || !(energy_kev > 0.0) || !(capacitance_f > 0.0)) {
    throw DomainError("chi_int_general requires positive l, E, C");
  }
  double v = beta_from_energy(energy_kev) * light_speed_m_s;
  return elementary_charge_c * elementary_charge_c * length_m /
         (v * hbar_j_s * capacitance_f);
}

double capacitor_energy_ev(int n_right, int n_left, double capacitance_f) {
  if (!(capacitance_f > 0.0)) throw DomainError("capacitance must be > 0");
  double dn = n_right - n_left;
  // e^2 dn^2 / (8C) joules = e dn^2 / (8C) electronvolts.
  return elementary_charge_c * dn * dn / (8.0 * capacitance_f);
}

double capacitor_voltage_v(int n_right, int n_left, double capacitance_f) {
  if (!(capacitance_f > 0.0)) throw DomainError("capacitance must be > 0");
  return elementary_charge_c * (n_right - n_left) / (2.0 * capacitance_f);
}

double pair_coulomb_phase(double separation_m, double path_m,
                          double energy_kev) {
  if (!(separation_m > 0.0)) throw DomainError("separation must be > 0");
  if (path_m < 0.0) throw DomainError("path length must be >= 0");
  double v = beta_from_energy(energy_kev) * light_speed_m_s;
  double energy_ev = coulomb_ev_nm * 1e-9 / separation_m;
  return energy_ev * (path_m / v) / hbar_ev_s;
}

double mean_electron_spacing(double current_na, double energy_kev) {
  if (!(current_na > 0.0)) throw DomainError("beam current must be > 0");
  double v = beta_from_energy(energy_kev) * light_speed_m_s;
  return v * elementary_charge_c / (current_na * 1e-9);
}

double cavity_amplitude(int n_right, double chi_meas) {
  if (chi_meas < 0.0) throw DomainError("chi_meas must be >= 0");
  return n_right * std::sqrt(0.5 * chi_meas);
}

double chi_from_coupling(std::complex<double> g_q) {
  return 2.0 * std::norm(g_q);
}

double inelastic_loss_share(double thickness_nm, double mean_free_path_nm) {
  if (thickness_nm < 0.0) throw DomainError("thickness must be >= 0");
  if (!(mean_free_path_nm > 0.0)) {
    throw DomainError("mean free path must be > 0");
  }
  return 1.0 - std::exp(-thickness_nm / mean_free_path_nm);
}

long long batch_size(double dose_per_a2, double pixel_angstrom) {
  if (!(dose_per_a2 > 0.0) || !(pixel_angstrom > 0.0)) {
    throw DomainError("batch_size requires positive dose and pixel size");
  }
  return std::llround(dose_per_a2 * pixel_angstrom * pixel_angstrom);
}

}  // namespace spinsq
