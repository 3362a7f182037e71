#pragma once
// Classical XYZ chain on a segment with gyrostat boundaries.
//
//   h(z) = tr K+(z) L^N(z) ... L^1(z) K-(z) L^1(-z)^{-1} ... L^N(-z)^{-1}
//
// K-+ are gyrostat matrices S0 + sum (S_a varphi_a(z) + nu~_a varphi_a(z - omega_a)) sigma_a
// with twice the Sklyanin brackets; the sites are S0 + sum S_a varphi_a(z) sigma_a with
// the nu' = 0 Sklyanin brackets.  Generators are ordered as S0..S3 of K-, of K+,
// then of each site.

#include <random>
#include <stdexcept>
#include <vector>

#include "ellwb/lax.hpp"
#include "ellwb/poisson.hpp"

namespace ellwb {

// Sites with different special-point constants.
class ConstraintError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct ChainState {
  GyroState minus, plus;         // boundaries, nu_prime consistent with nu_tilde
  std::vector<GyroState> sites;  // nu~ = 0

  int size() const { return 8 + 4 * static_cast<int>(sites.size()); }
  std::vector<cplx> pack() const;
};

// Random boundaries and sites (spins ~ 0.4 N(0,1) per component); each site's S0
// is chosen so that its special-point constant equals C.
ChainState make_chain(int n_sites, cplx C, std::uint64_t seed, const ModularPoint& m);

// (S0^2 + sum S_a^2 E2(omega_a)) / sum S_a^2: det L(z) = (C - E2(z)) sum S_a^2.
cplx site_constant(const GyroState& site, const ModularPoint& m);
// Common constant of all sites; ConstraintError if they differ by more than tol (relative).
cplx common_constant(const ChainState& s, const ModularPoint& m, double tol = 1e-10);
// A root of E2(z0) = C by Newton iteration from 8 starting points in the cell.
cplx special_point(cplx C, const ModularPoint& m);

Mat site_matrix(const GyroState& site, cplx z, const ModularPoint& m);
Mat boundary_matrix(const GyroState& b, cplx z, const ModularPoint& m);

cplx transfer_h(const ChainState& s, cplx z, const ModularPoint& m);
// dh/dx over all generators, exact (each generator enters one factor linearly).
std::vector<cplx> transfer_gradient(const ChainState& s, cplx z, const ModularPoint& m);

// Boundary tables scaled by boundary_factor times the Sklyanin brackets (2 is the
// chain's requirement), plus the site tables.
BracketTable chain_table(const ChainState& s, const ModularPoint& m, double boundary_factor = 2.0);

// |grad F . B . grad G| / (max|grad F| max|grad G| max|B|)
double bracket_residual(const BracketTable& t, const std::vector<cplx>& state, const std::vector<cplx>& dF,
                        const std::vector<cplx>& dG);

double commutativity_residual(const ChainState& s, cplx z, cplx w, const ModularPoint& m,
                              double boundary_factor = 2.0);

// max over generators of the normalised {det L^i(z), x} for every site.
double site_determinant_residual(const ChainState& s, cplx z, const ModularPoint& m);

// H = log(S0^- S0^1 + sum (S_a^- S_a^1 (C - E2(omega_a)) + nu'^-_a S_a^1))
//   + log(S0^N S0^+ + sum (S_a^N S_a^+ (C - E2(omega_a)) + nu'^+_a S_a^N))
//   + sum_i log(S0^i S0^{i+1} + sum S_a^i S_a^{i+1} (C - E2(omega_a))),
// principal branch.  Requires at least one site and a common C.
struct BoundaryHamiltonian {
  cplx value;
  cplx C;
  cplx z0;  // E2(z0) = C; every site matrix is degenerate there
  std::vector<cplx> gradient;
};
BoundaryHamiltonian boundary_hamiltonian(const ChainState& s, const ModularPoint& m, int nu_sign = +1);

double hamiltonian_residual(const ChainState& s, cplx w, const ModularPoint& m, int nu_sign = +1);

}  // namespace ellwb
