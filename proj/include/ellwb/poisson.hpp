#pragma once
// Classical Poisson structures as polynomial bracket tables: linear Lie-Poisson
// brackets on sl(N) and sl(2), the quadratic Sklyanin-Feigin-Odesski algebra,
// its rank-two gyrostat deformation from the reflection equation, and the
// boundary / site brackets of the spin chain.  Plus r-matrices and the
// Lax-form checks that tie each table to its r-matrix relation.

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ellwb/lax.hpp"

namespace ellwb {

class SchemaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Polynomial in a fixed number of variables with complex coefficients.
class Polynomial {
 public:
  using Exponents = std::vector<int>;

  explicit Polynomial(int nvars = 0) : n_(nvars) {}
  static Polynomial constant(int nvars, cplx c);
  static Polynomial variable(int nvars, int i);

  int nvars() const { return n_; }
  const std::map<Exponents, cplx>& terms() const { return t_; }
  bool is_zero() const { return t_.empty(); }

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(cplx c);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, cplx c) { return a *= c; }
  friend Polynomial operator*(cplx c, Polynomial a) { return a *= c; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  Polynomial derivative(int i) const;
  cplx operator()(const std::vector<cplx>& x) const;

 private:
  void add_term(const Exponents& e, cplx c);
  void same_shape(const Polynomial& o) const;
  int n_;
  std::map<Exponents, cplx> t_;
};

enum class BracketKind { LinearSlN, LinearSl2, Sklyanin, SFO, Boundary, Site, Pencil };
const char* bracket_kind_name(BracketKind k);

// Antisymmetric table {x_i, x_j} = B_ij(x) with polynomial entries.
class BracketTable {
 public:
  BracketTable(BracketKind kind, std::vector<std::string> generators);

  BracketKind kind() const { return kind_; }
  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& generators() const { return names_; }
  int index(const std::string& name) const;  // SchemaError if absent
  Polynomial variable(const std::string& name) const;
  Polynomial constant(cplx c) const { return Polynomial::constant(size(), c); }

  // Sets B_ij and B_ji = -B_ij.  i == j is rejected.
  void set(int i, int j, const Polynomial& p);
  const Polynomial& entry(int i, int j) const { return b_[i * size() + j]; }
  cplx bracket(int i, int j, const std::vector<cplx>& state) const;

 private:
  BracketKind kind_;
  std::vector<std::string> names_;
  std::vector<Polynomial> b_;
};

// {F, G}(x) = sum_ij dF/dx_i dG/dx_j B_ij(x).
cplx bracket_of_functions(const BracketTable& t, const Polynomial& F, const Polynomial& G,
                          const std::vector<cplx>& state);
// max over i < j < k of |{x_i, {x_j, x_k}} + cyclic|.
double jacobi_residual(const BracketTable& t, const std::vector<cplx>& state);
// a + lambda b over the union of generators (matched by name, a's order first).
BracketTable pencil(const BracketTable& a, const BracketTable& b, cplx lambda);
// Same table with every generator name suffixed.
BracketTable renamed(const BracketTable& t, const std::string& suffix);
// Commuting union of two tables with disjoint generators (SchemaError otherwise).
BracketTable direct_sum(const BracketTable& a, const BracketTable& b);

// ---------------------------------------------------------------------------
// Tables.  sl(N) generators "S[a1,a2]" over sl_basis_indices(N); sigma-basis
// generators "S0", "S1", "S2", "S3".

// C(a, b) = (N / pi) sin(pi (a x b) / N)
double structure_constants(const LatticeIndex& a, const LatticeIndex& b);

// {S_a, S_b}_1 = C(a, b) S_{a+b}
BracketTable linear_sln_table(int N);
// {S_alpha, S_beta}_1 = 2i eps S_gamma on S1, S2, S3
BracketTable linear_sl2_table();
// Quadratic brackets of the exchange relation {L~1(z), L~2(w)} = [r(z - w), L~1(z) L~2(w)],
// L~ = -S0 Id + sum S_a varphi_a T_a; see poisson.cpp for the coordinate form.
BracketTable sfo_table(int N, const ModularPoint& m);
// {S_alpha, S_beta}_2 = 2i eps S0 S_gamma,
// {S0, S_alpha}_2 = i eps S_beta S_gamma (J_beta - J_gamma) + 2i eps S_beta nu'_gamma, J = E2(omega).
BracketTable sklyanin_table(const ModularPoint& m, const std::array<cplx, 3>& nu_prime);
// Twice the Sklyanin table: the brackets required of the chain's boundary matrices.
BracketTable boundary_table(const ModularPoint& m, const std::array<cplx, 3>& nu_prime);
// n decoupled copies of the nu' = 0 Sklyanin table, generators "S0^i", "S1^i", ...
BracketTable site_table(const ModularPoint& m, int sites);

// c1 = sum S_alpha^2,  c2 = S0^2 + sum (wp(omega_alpha) S_alpha^2 - 2 nu'_alpha S_alpha).
// det L~(z) = c2 - wp(z) c1 + (terms free of S); the sign of the nu' term is the one
// the determinant produces with nu' as in nu_prime_from_tilde.
struct SklyaninCasimirs {
  Polynomial c1, c2;
};
SklyaninCasimirs sklyanin_casimirs(const BracketTable& t, const ModularPoint& m, const std::array<cplx, 3>& nu_prime);

// ---------------------------------------------------------------------------
// r-matrices, N^2 x N^2 on C^N (x) C^N with the first factor as the outer index.

// r(z - w) = sum_gamma varphi_gamma(z - w) T_gamma (x) T_{-gamma}
Mat r_matrix(cplx z, cplx w, const ModularPoint& m, int N);
// r^{+-}(z, w) = sum_alpha varphi_alpha(z +- w) sigma_alpha (x) sigma_alpha
Mat reflection_r(cplx z, cplx w, const ModularPoint& m, int sign);
// sum_gamma T_gamma (x) T_{-gamma}
Mat r_residue(int N);
// max entry of [r12(w-w'), r13(w)] + [r12(w-w'), r23(w')] + [r13(w), r23(w')]
double cybe_residual(cplx w, cplx wp, const ModularPoint& m, int N);

Mat kron(const Mat& a, const Mat& b);

// ---------------------------------------------------------------------------
// Lax-form checks.  Each returns max |LHS - RHS| / max(1, max |RHS|), where the
// LHS is assembled from a bracket table and the exact dL/dx (L is linear in x).

// {L1(z), L2(w)}_1 = [r(z - w), L(z) (x) Id + Id (x) L(w)],  L = sum S_a varphi_a T_a
double linear_rmatrix_check(const std::vector<cplx>& S, cplx z, cplx w, const ModularPoint& m);
// {L~1(z), L~2(w)}_2 = [r(z - w), L~1(z) L~2(w)],  L~ = -S0 Id + L
double quadratic_exchange_check(cplx S0, const std::vector<cplx>& S, cplx z, cplx w, const ModularPoint& m);

// L~(z) = S0 sigma0 + sum (S_alpha varphi_alpha(z) + nu~_alpha varphi_alpha(z - omega_alpha)) sigma_alpha
Mat gyro_lax_tilde(const GyroState& g, const ModularPoint& m, cplx z, bool with_s0 = true);

struct ReflectionResiduals {
  double quadratic = 0;  // (1/2)[L1 L2, r-] + (1/2) L2 r+ L1 - (1/2) L1 r+ L2 from the Sklyanin table
  double linear = 0;     // -(1/2)[r-, L1 + L2] + (1/2)[r+, L1 - L2] from the linear sl2 table
};
ReflectionResiduals reflection_bracket_check(const GyroState& g, cplx z, cplx w, const ModularPoint& m);
// The same left-hand sides against the unreduced forms [L1 L2, r-] and [L1 + L2, r-].
ReflectionResiduals unreduced_reflection_check(const GyroState& g, cplx z, cplx w, const ModularPoint& m);

struct BihamiltonianResiduals {
  double flow = 0;    // {S0, S_alpha}_2 against the autonomous gyrostat velocity
  double pencil = 0;  // max over lambda of the Jacobi residual of {,}_2 + lambda {,}_1
};
BihamiltonianResiduals bihamiltonian_check(const GyroState& g, const ModularPoint& m,
                                           const std::vector<cplx>& lambdas = {0.5, 1.0, 2.0});
// sl(N): {S0, S_a}_2 from the SFO table against (N / 2 pi i)^2 times the elliptic top
// velocity (coefficients of [J.S, S]).
double top_bihamiltonian_check(const std::vector<cplx>& S, int N, const ModularPoint& m);

}  // namespace ellwb
