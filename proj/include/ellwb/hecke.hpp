#pragma once
// Modification of bundles: the matrices Xi, their gauge action on Lax matrices,
// and the explicit rank-two map from Calogero-Inozemtsev to gyrostat variables.

#include <array>
#include <vector>

#include "ellwb/flows.hpp"
#include "ellwb/lax.hpp"

namespace ellwb {

// Xi(z) = Xi~(z) diag((-1)^l / r_l),  Xi~_ij = theta[i/N - 1/2; N/2](z - N u_j, N tau), i, l = 1..N.
class ModificationMatrix {
 public:
  ModificationMatrix(std::vector<cplx> u, std::vector<cplx> r, cplx tau);

  int N() const { return static_cast<int>(u_.size()); }
  cplx tau() const { return tau_; }
  const std::vector<cplx>& u() const { return u_; }
  const std::vector<cplx>& r() const { return r_; }

  Mat tilde(cplx z) const;
  Mat operator()(cplx z) const;
  Mat dz(cplx z, int order = 1) const;
  // k_l = (-1)^l prod_{j<k; j,k != l} theta(u_k - u_j), so that Xi~(0) k = 0.
  Vec kernel_vector() const;

  // Xi(z+1) = A Xi(z),  Xi(z+tau) = c(z) B Xi(z) diag(e(u_j)) with A = -Q, B = Lambda.
  Mat shift_one() const;
  Mat shift_tau() const;

 private:
  Mat eval(cplx z, int dz) const;
  std::vector<cplx> u_, r_;
  cplx tau_;
  Mat scale_;
};

// u_j distinct modulo the lattice, r without zero entries.
ModificationMatrix build_xi(const std::vector<cplx>& u, const std::vector<cplx>& r, const ModularPoint& m);

class SingularModificationError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// L1 = kappa Xi d_z(Xi^{-1}) + Xi L0 Xi^{-1}.  The result is frozen at the state of L0:
// with_state on it throws.  Only z-derivatives are available.
LaxField modify_lax(const ModificationMatrix& xi, const LaxField& L0, cplx kappa);

// Residue at z = 0 of a 2 x 2 field, split as r0 sigma_0 + sum r_alpha sigma_alpha.
std::array<cplx, 4> sigma_components(const Mat& x);

// CI constants nu (at omega_0..omega_3) to nu~ (same indexing) and nu' (sigma labels).
struct ConstantMaps {
  std::array<cplx, 4> nu_tilde{};
  std::array<cplx, 3> nu_tilde_sigma{};
  std::array<cplx, 3> nu_prime{};
};
ConstantMaps constant_maps(const std::array<cplx, 4>& nu, const ModularPoint& m);

// CI nu~ (omega indexing) to the gyrostat constants at the half-periods, sigma labels.
std::array<cplx, 3> gyro_nu_tilde(const std::array<cplx, 4>& ci_nu_tilde);

// Gyrostat coordinates of the upper modification of the rank-two CI system.
// S_sigma3, S_sigma2, S_sigma1 are the three theta-ratio expressions in (u, v, kappa).
GyroState cm_to_zvg_coords(cplx u, cplx v, const std::array<cplx, 4>& nu_tilde, cplx kappa, const ModularPoint& m);

// The same map with derivatives: columns d/du, d/dv, d/dtau of (S1, S2, S3).
struct CoordinateJacobian {
  std::array<cplx, 3> S{};
  std::array<std::array<cplx, 3>, 3> d{};  // d[k][alpha], k = u, v, tau
};
CoordinateJacobian cm_to_zvg_jacobian(cplx u, cplx v, const std::array<cplx, 4>& nu_tilde, cplx kappa, cplx tau);

// |dS/dt - (gyrostat flow)(S)| / max(1, |dS/dt|) at one point of a CI (kappa = 0) or
// EPVI trajectory, with dS/dt by the chain rule through cm_to_zvg_jacobian.
double pushforward_residual(const FlowSpec& ci_or_epvi, cplx time, const std::vector<cplx>& state);

}  // namespace ellwb
