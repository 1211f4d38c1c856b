#pragma once

// Unit-bearing calculators connecting beam and hardware parameters to the
// dimensionless squeezing strengths: relativistic kinematics, capacitive
// channel formulas, pairwise Coulomb phase, beam spacing, cavity constants,
// dose budgets, and inelastic loss shares. Public signatures carry explicit
// units; internals are SI.

#include <complex>

namespace spinsq {

namespace constants {
// CODATA values, fixed for reproducibility.
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double fine_structure = 7.2973525693e-3;
inline constexpr double electron_rest_kev = 510.99895;   // m_e c^2
inline constexpr double coulomb_ev_nm = 1.43996;         // e^2/(4 pi eps0)
inline constexpr double hbar_ev_s = 6.582119569e-16;
inline constexpr double light_speed_m_s = 2.99792458e8;
inline constexpr double elementary_charge_c = 1.602176634e-19;
inline constexpr double hbar_j_s = hbar_ev_s * elementary_charge_c;
// Vacuum permittivity via alpha = e^2/(4 pi eps0 hbar c), so the capacitive
// channel formulas are exactly consistent with the fine-structure form.
inline constexpr double epsilon0_f_m =
    elementary_charge_c * elementary_charge_c /
    (4.0 * kPi * fine_structure * hbar_j_s * light_speed_m_s);
}  // namespace constants

struct BeamParams {
  double kinetic_energy_kev = 0.0;
  double current_na = 0.0;
};

struct ChannelGeometry {
  double length_m = 0.0;      // channel length l
  double separation_m = 0.0;  // center-to-center distance d
  double radius_m = 0.0;      // cylinder radius r
};

// beta = v/c from the kinetic energy, gamma = 1 + E/(m_e c^2).
double beta_from_energy(double energy_kev);

// Mutual capacitance of two parallel cylinders, C = l eps0 pi / arccosh(d/2r).
double mutual_capacitance(const ChannelGeometry& geom);

// chi_int = 4 (alpha/beta) arccosh(d_over_r / 2); independent of length.
double chi_int_cylindrical(double d_over_r, double energy_kev);

// chi_int = e^2 l / (v hbar C); algebraically identical to the cylindrical
// form when C comes from mutual_capacitance.
double chi_int_general(double length_m, double energy_kev,
                       double capacitance_f);

// Electrostatic energy e^2 (n_R - n_L)^2 / (8 C), in eV.
double capacitor_energy_ev(int n_right, int n_left, double capacitance_f);

// Potential difference e (n_R - n_L) / (2 C), in volts.
double capacitor_voltage_v(int n_right, int n_left, double capacitance_f);

// Coulomb phase [e^2/(4 pi eps0 s)] (L/v) / hbar accumulated by an electron
// pair at separation s over path length L.
double pair_coulomb_phase(double separation_m, double path_m,
                          double energy_kev);

// Mean longitudinal spacing v e / I of beam electrons.
double mean_electron_spacing(double current_na, double energy_kev);

// Coherent cavity amplitude alpha = n_R sqrt(chi_meas / 2).
double cavity_amplitude(int n_right, double chi_meas);

// chi_meas = 2 |g_q|^2 from the electron-photon coupling.
double chi_from_coupling(std::complex<double> g_q);

// Share of electrons lost to inelastic scattering, 1 - exp(-t/lambda).
double inelastic_loss_share(double thickness_nm, double mean_free_path_nm);

// Electrons per image pixel from the dose budget, round(dose * pixel^2).
long long batch_size(double dose_per_a2, double pixel_angstrom);

}  // namespace spinsq
