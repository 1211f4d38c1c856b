#include "spinsq/dicke.hpp"

#include <lapacke.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "spinsq/errors.hpp"

namespace spinsq {

namespace {

// Ladder coefficient: S_+ |k> = cplus(N, k) |k-1> with m_k = N/2 - k,
// cplus = sqrt(j(j+1) - m_k(m_k+1)), j = N/2.
double cplus(int n, int k) {
  double j = 0.5 * n;
  double m = j - k;
  return std::sqrt(j * (j + 1.0) - m * (m + 1.0));
}

// Eigenbasis of the equatorial generator S_x, which is real symmetric
// tridiagonal on the Dicke basis (zero diagonal, off-diagonal between k and
// k+1 equal to cplus(N, k+1)/2). Eigenvalues of S_x are exactly the spin
// spectrum {-j..j}; they are snapped to those half-integers so that rotation
// phases at special angles (pi/2, pi) are exact.
struct EquatorialBasis {
  int n;
  std::vector<double> eigval;  // ascending, snapped to -j + i
  std::vector<double> vec;     // column-major (N+1) x (N+1), column = eigvec
};

const EquatorialBasis& equatorial_basis(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<EquatorialBasis>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return *it->second;

  auto basis = std::make_unique<EquatorialBasis>();
  basis->n = n;
  int dim = n + 1;
  std::vector<double> diag(dim, 0.0);
  std::vector<double> offdiag(dim > 1 ? dim - 1 : 1);
  for (int k = 0; k + 1 < dim; ++k) offdiag[k] = 0.5 * cplus(n, k + 1);
  basis->vec.assign(static_cast<std::size_t>(dim) * dim, 0.0);
  // dstevd: eigenvalues ascending, eigenvectors in column-major z.
  lapack_int info = LAPACKE_dstevd(LAPACK_COL_MAJOR, 'V', dim, diag.data(),
                                   offdiag.data(), basis->vec.data(), dim);
  if (info != 0) {
    throw NumericalError("tridiagonal eigendecomposition failed at N = " +
                         std::to_string(n));
  }
  basis->eigval.resize(dim);
  double j = 0.5 * n;
  for (int i = 0; i < dim; ++i) {
    // Computed eigenvalues sit within ~1e-13 of the exact spectrum.
    basis->eigval[i] = -j + i;
    if (std::abs(diag[i] - basis->eigval[i]) > 1e-8) {
      throw NumericalError("equatorial spectrum deviates from -j..j at N = " +
                           std::to_string(n));
    }
  }
  auto& slot = cache[n];
  slot = std::move(basis);
  return *slot;
}

// out = V diag(exp(-i angle eigval)) V^T in, with V real. The complex matvec
// is split into two real ones over the packed column-major V.
std::vector<cplx> apply_spectral(const EquatorialBasis& basis,
                                 const std::vector<cplx>& in, double angle) {
  int dim = basis.n + 1;
  std::vector<cplx> w(dim, cplx(0.0, 0.0));
  for (int c = 0; c < dim; ++c) {
    const double* col = &basis.vec[static_cast<std::size_t>(c) * dim];
    cplx acc(0.0, 0.0);
    for (int r = 0; r < dim; ++r) acc += col[r] * in[r];
    w[c] = acc * std::polar(1.0, -angle * basis.eigval[c]);
  }
  std::vector<cplx> out(dim, cplx(0.0, 0.0));
  for (int c = 0; c < dim; ++c) {
    const double* col = &basis.vec[static_cast<std::size_t>(c) * dim];
    cplx wc = w[c];
    for (int r = 0; r < dim; ++r) out[r] += col[r] * wc;
  }
  return out;
}

// i^k for k mod 4; used to conjugate S_x into S_y.
cplx ipow(int k) {
  switch (k & 3) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

void check_finite_angle(double angle) {
  if (!std::isfinite(angle)) throw DomainError("rotation angle must be finite");
}

}  // namespace

DickeState::DickeState(int n, std::vector<cplx> a)
    : n_electrons(n), amplitudes(std::move(a)) {
  if (n < 1) throw DomainError("batch size N must be >= 1");
  if (static_cast<int>(amplitudes.size()) != n + 1) {
    throw DomainError("amplitude vector must have length N + 1");
  }
}

double DickeState::norm() const {
  double s = 0.0;
  for (const cplx& a : amplitudes) s += std::norm(a);
  return std::sqrt(s);
}

DickeState basis_state(int n, int n_r) {
  if (n < 1) throw DomainError("batch size N must be >= 1");
  if (n_r < 0 || n_r > n) {
    throw DomainError("n_R = " + std::to_string(n_r) + " outside [0, " +
                      std::to_string(n) + "]");
  }
  std::vector<cplx> a(n + 1, cplx(0.0, 0.0));
  a[n_r] = 1.0;
  return DickeState(n, std::move(a));
}

DickeState coherent_state(int n) {
  if (n < 1) throw DomainError("batch size N must be >= 1");
  std::vector<cplx> a(n + 1);
  double lg_n = std::lgamma(n + 1.0);
  for (int k = 0; k <= n; ++k) {
    double log_amp = 0.5 * (lg_n - std::lgamma(k + 1.0) -
                            std::lgamma(n - k + 1.0)) -
                     0.5 * n * std::log(2.0);
    a[k] = std::exp(log_amp);
  }
  return DickeState(n, std::move(a));
}

DickeState rotate(const DickeState& state, Axis axis, double angle) {
  check_finite_angle(angle);
  int n = state.n_electrons;
  if (axis == Axis::Z) {
    // Diagonal: amplitudes[k] *= exp(-i angle m_k).
    DickeState out = state;
    for (int k = 0; k <= n; ++k) {
      out.amplitudes[k] *= std::polar(1.0, -angle * state.m(k));
    }
    return out;
  }
  const EquatorialBasis& basis = equatorial_basis(n);
  if (axis == Axis::X) {
    return DickeState(n, apply_spectral(basis, state.amplitudes, angle));
  }
  // S_y = D S_x D^dagger with D = diag(i^k), so
  // exp(-i angle S_y) = D exp(-i angle S_x) D^dagger.
  std::vector<cplx> tmp(n + 1);
  for (int k = 0; k <= n; ++k) tmp[k] = std::conj(ipow(k)) * state.amplitudes[k];
  tmp = apply_spectral(basis, tmp, angle);
  for (int k = 0; k <= n; ++k) tmp[k] *= ipow(k);
  return DickeState(n, std::move(tmp));
}

DickeState rotate(const DickeState& state, const std::array<double, 3>& axis,
                  double angle) {
  check_finite_angle(angle);
  double nx = axis[0], ny = axis[1], nz = axis[2];
  double norm = std::sqrt(nx * nx + ny * ny + nz * nz);
  if (std::abs(norm - 1.0) > 1e-12) {
    throw DomainError("rotation axis must be a unit vector");
  }
  double t = std::hypot(nx, ny);
  if (t < 1e-15) {
    return rotate(state, Axis::Z, nz > 0 ? angle : -angle);
  }
  // S_n = P (t S_x + nz S_z) P^dagger with P = diag(exp(i Phi k)),
  // Phi = atan2(ny, nx); the conjugated generator is again real symmetric
  // tridiagonal, so one dstevd gives the exact rotation.
  int n = state.n_electrons;
  int dim = n + 1;
  double phi_az = std::atan2(ny, nx);
  std::vector<double> diag(dim), offdiag(dim > 1 ? dim - 1 : 1);
  for (int k = 0; k < dim; ++k) diag[k] = nz * state.m(k);
  for (int k = 0; k + 1 < dim; ++k) offdiag[k] = 0.5 * t * cplus(n, k + 1);
  std::vector<double> vec(static_cast<std::size_t>(dim) * dim, 0.0);
  lapack_int info = LAPACKE_dstevd(LAPACK_COL_MAJOR, 'V', dim, diag.data(),
                                   offdiag.data(), vec.data(), dim);
  if (info != 0) {
    throw NumericalError("axis-rotation eigendecomposition failed");
  }
  std::vector<cplx> tmp(dim);
  for (int k = 0; k < dim; ++k) {
    tmp[k] = std::polar(1.0, -phi_az * k) * state.amplitudes[k];
  }
  std::vector<cplx> w(dim, cplx(0.0, 0.0));
  for (int c = 0; c < dim; ++c) {
    const double* col = &vec[static_cast<std::size_t>(c) * dim];
    cplx acc(0.0, 0.0);
    for (int r = 0; r < dim; ++r) acc += col[r] * tmp[r];
    w[c] = acc * std::polar(1.0, -angle * diag[c]);
  }
  std::vector<cplx> out(dim, cplx(0.0, 0.0));
  for (int c = 0; c < dim; ++c) {
    const double* col = &vec[static_cast<std::size_t>(c) * dim];
    for (int r = 0; r < dim; ++r) out[r] += col[r] * w[c];
  }
  for (int k = 0; k < dim; ++k) out[k] *= std::polar(1.0, phi_az * k);
  return DickeState(n, std::move(out));
}

DickeState phase_shift(const DickeState& state, double phi) {
  check_finite_angle(phi);
  return rotate(state, Axis::Z, phi);
}

SpinMoments moments(const DickeState& state) {
  double nrm = state.norm();
  if (std::abs(nrm - 1.0) > 1e-6) {
    throw NumericalError("moments() requires a normalized state (norm = " +
                         std::to_string(nrm) + ")");
  }
  int n = state.n_electrons;
  int dim = n + 1;
  const auto& a = state.amplitudes;
  // u_i = S_i |psi> via ladder shifts:
  //   (S_+ psi)[k] = cplus(k+1) psi[k+1], (S_- psi)[k] = cplus(k) psi[k-1].
  std::vector<cplx> ux(dim), uy(dim), uz(dim);
  for (int k = 0; k < dim; ++k) {
    cplx up = (k + 1 < dim) ? cplus(n, k + 1) * a[k + 1] : cplx(0.0, 0.0);
    cplx dn = (k - 1 >= 0) ? cplus(n, k) * a[k - 1] : cplx(0.0, 0.0);
    ux[k] = 0.5 * (up + dn);
    uy[k] = cplx(0.0, -0.5) * (up - dn);
    uz[k] = state.m(k) * a[k];
  }
  const std::vector<cplx>* u[3] = {&ux, &uy, &uz};
  SpinMoments mom;
  for (int i = 0; i < 3; ++i) {
    cplx acc(0.0, 0.0);
    for (int k = 0; k < dim; ++k) acc += std::conj(a[k]) * (*u[i])[k];
    mom.mean[i] = acc.real();
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      // <{S_i,S_j}>/2 = Re <u_i | u_j> for Hermitian S_i, S_j.
      cplx acc(0.0, 0.0);
      for (int k = 0; k < dim; ++k) acc += std::conj((*u[i])[k]) * (*u[j])[k];
      double second = acc.real();
      mom.cov[i][j] = second - mom.mean[i] * mom.mean[j];
      mom.cov[j][i] = mom.cov[i][j];
    }
  }
  return mom;
}

std::vector<double> number_distribution(const DickeState& state) {
  std::vector<double> p(state.dim());
  for (int k = 0; k < state.dim(); ++k) p[k] = std::norm(state.amplitudes[k]);
  return p;
}

cplx overlap(const DickeState& a, const DickeState& b) {
  if (a.n_electrons != b.n_electrons) {
    throw DomainError("overlap requires equal batch sizes");
  }
  cplx acc(0.0, 0.0);
  for (int k = 0; k < a.dim(); ++k) {
    acc += std::conj(a.amplitudes[k]) * b.amplitudes[k];
  }
  return acc;
}

double variance_along(const SpinMoments& mom, const std::array<double, 3>& u) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) s += u[i] * mom.cov[i][j] * u[j];
  }
  return s;
}

}  // namespace spinsq
