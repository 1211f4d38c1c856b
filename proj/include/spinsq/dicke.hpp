#pragma once

#include <array>
#include <complex>
#include <vector>

namespace spinsq {

using cplx = std::complex<double>;

// Collective spin state of an N-electron batch on the symmetric (spin-N/2)
// subspace. Amplitudes are indexed by k = n_R in {0..N}, the number of
// electrons in the right arm; index k carries the S_z eigenvalue
// m_k = N/2 - k, so k = 0 is the all-left state.
struct DickeState {
  int n_electrons = 0;
  std::vector<cplx> amplitudes;  // length n_electrons + 1

  DickeState() = default;
  DickeState(int n, std::vector<cplx> a);

  int dim() const { return n_electrons + 1; }
  // S_z eigenvalue of amplitude index k.
  double m(int k) const { return 0.5 * n_electrons - k; }
  double norm() const;
};

enum class Axis { X, Y, Z };

// Mean spin vector and symmetrized covariance,
// cov(i,j) = <{S_i,S_j}>/2 - <S_i><S_j>.
struct SpinMoments {
  std::array<double, 3> mean{};
  std::array<std::array<double, 3>, 3> cov{};
};

// |n_L = N - n_R, n_R>. Throws DomainError for n_R outside [0, N] or N < 1.
DickeState basis_state(int n, int n_r);

// The unsqueezed interferometer input: the all-left state rotated by the
// first beamsplitter, rotate(basis_state(N,0), Y, pi/2). Amplitudes are the
// real positive binomial ones |a_k| = 2^{-N/2} sqrt(C(N,k)), built in log
// space so they stay finite up to N ~ thousands.
DickeState coherent_state(int n);

// exp(-i * angle * S_axis) |state>. The rotation sense: exp(-i theta S_n)
// rotates the Bloch vector right-handed by +theta about n. Implemented by a
// cached eigendecomposition of the tridiagonal generator; exactly unitary at
// machine precision for all angles. Throws DomainError on non-finite angle.
DickeState rotate(const DickeState& state, Axis axis, double angle);

// Rotation about an arbitrary unit 3-vector (norm 1 within 1e-12, else
// DomainError). Not cached; intended for small N and cross-checks.
DickeState rotate(const DickeState& state, const std::array<double, 3>& axis,
                  double angle);

// Sample phase: amplitudes[k] *= exp(-i * phi * m_k). Identical to
// rotate(state, Z, phi); diagonal and O(N). With this sign a positive phi
// advances the mean-spin azimuth from +x towards +y.
DickeState phase_shift(const DickeState& state, double phi);

// First and symmetrized second moments of (S_x, S_y, S_z) via O(N) ladder
// shifts. Throws NumericalError if the input norm deviates from 1 by > 1e-6.
SpinMoments moments(const DickeState& state);

// p_k = |amplitudes[k]|^2 over n_R.
std::vector<double> number_distribution(const DickeState& state);

// <a|b>. Throws DomainError on mismatched N.
cplx overlap(const DickeState& a, const DickeState& b);

// Variance along a unit direction u: u^T cov u.
double variance_along(const SpinMoments& mom, const std::array<double, 3>& u);

}  // namespace spinsq
