#pragma once

#include <vector>

#include "spinsq/dicke.hpp"

namespace spinsq {

// Sample points on the Bloch sphere: polar angles theta in [0, pi] and
// azimuths phi_az in [0, 2*pi), both strictly increasing.
struct SphereGrid {
  std::vector<double> theta;
  std::vector<double> phi_az;
};

// Uniform grid with n_theta polar samples (endpoints included) and n_phi
// azimuthal samples (2*pi excluded). Throws DomainError for n_theta < 2 or
// n_phi < 4.
SphereGrid make_sphere_grid(int n_theta, int n_phi);

// Validates the SphereGrid invariants (counts, ranges, monotonicity).
void validate_grid(const SphereGrid& grid);

// Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> with all spins and
// projections passed doubled (so half-integers stay integral). Evaluated by
// the Racah sum with log-space factorials; exact zeros for violated
// selection rules.
double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2,
                      int two_j, int two_m);

// Spin Wigner function on the grid, row-major over (theta, phi_az):
//   W(theta, phi) = sum_{K=0..N} sum_{Q=-K..K} rho_KQ Y_KQ(theta, phi),
// with orthonormal multipole operators T_KQ = sqrt((2K+1)/(N+1)) CG and
// rho_KQ = <psi| T_KQ^dagger |psi>. Under this normalization the sphere
// integral of W is sqrt(4*pi/(N+1)) for every normalized state.
// The full complex sum is evaluated and must be real within 1e-9; larger
// imaginary residue raises NumericalError. Restricted to N <= 100 (the
// multipole table grows as O(N^3)); larger N raises DomainError.
std::vector<double> wigner_function(const DickeState& state,
                                    const SphereGrid& grid);

// The documented value of the sphere integral of W for batch size N.
double wigner_sphere_integral(int n);

}  // namespace spinsq
