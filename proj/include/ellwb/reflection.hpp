#pragma once
// Quantum reflection equation for the rank-two gyrostat: R-matrices, the quantum
// Lax operator, and the generalized Sklyanin algebra.  Noncommutative
// polynomials in S^_0..S^_3 are kept as coefficient maps over words; membership
// in the two-sided ideal of the six defining relations is decided numerically by
// projection onto the span of the relations (and of their products with one
// generator at degree three).

#include <array>
#include <map>
#include <vector>

#include "ellwb/lax.hpp"

namespace ellwb {

// Word over the generators 0..3 (S^_0 .. S^_3).  Graded lexicographic order.
using Word = std::vector<int>;
struct WordOrder {
  bool operator()(const Word& a, const Word& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
};

class NCPoly {
 public:
  static constexpr int kMaxDegree = 3;

  NCPoly() = default;
  static NCPoly constant(cplx c);
  static NCPoly generator(int a);
  static NCPoly word(const Word& w, cplx c = 1.0);

  const std::map<Word, cplx, WordOrder>& terms() const { return t_; }
  cplx coefficient(const Word& w) const;
  int degree() const;  // -1 for the zero polynomial
  double norm() const;  // Euclidean norm of the coefficient vector
  bool is_zero() const { return t_.empty(); }

  NCPoly& operator+=(const NCPoly& o);
  NCPoly& operator-=(const NCPoly& o);
  NCPoly& operator*=(cplx c);
  friend NCPoly operator+(NCPoly a, const NCPoly& b) { return a += b; }
  friend NCPoly operator-(NCPoly a, const NCPoly& b) { return a -= b; }
  friend NCPoly operator*(NCPoly a, cplx c) { return a *= c; }
  friend NCPoly operator*(cplx c, NCPoly a) { return a *= c; }
  // Throws std::length_error above degree 3 unless truncate is set, in which
  // case the higher words are dropped.
  static NCPoly product(const NCPoly& a, const NCPoly& b, bool truncate = false);
  friend NCPoly operator*(const NCPoly& a, const NCPoly& b) { return product(a, b); }

 private:
  void add(const Word& w, cplx c);
  std::map<Word, cplx, WordOrder> t_;
};

NCPoly commutator(const NCPoly& a, const NCPoly& b);

// ---------------------------------------------------------------------------

struct RelationOptions {
  // +1: [S^_g, S^_0] = i k [S^_a, S^_b]_+ + (2i/K_g)(nu~_a rho_a S^_b - nu~_b rho_b S^_a), the
  // sign consistent with the reflection equation.  -1: the opposite sign.
  int nu_sign = +1;
  std::array<double, 4> k_scale{1, 1, 1, 1};  // multiplies K_alpha (mutation controls)
};

struct RelationSet {
  cplx hbar;
  std::array<cplx, 3> nu_tilde{};
  std::array<cplx, 4> K{};    // K_alpha, alpha = 1..3
  std::array<cplx, 4> rho{};  // rho_alpha, alpha = 1..3
  // relations[2k]: i [S^_0, S^_a]_+ - [S^_b, S^_g];  relations[2k+1]: the (S^_g, S^_0) relation;
  // (a, b, g) the k-th cyclic triple.
  std::vector<NCPoly> relations;
};

RelationSet make_relations(cplx hbar, const std::array<cplx, 3>& nu_tilde, const ModularPoint& m,
                           const RelationOptions& opt = {});

// Least-squares membership test for the ideal generated by a RelationSet, up to
// the given degree (2: scalar multiples of the relations; 3: also R_k S^_b and S^_b R_k).
class IdealReducer {
 public:
  static constexpr double kSingularCutoff = 1e-10;

  IdealReducer(const RelationSet& rel, int degree);
  int rank() const { return rank_; }
  int degree() const { return degree_; }
  // |v - proj v| / max(1, |v|)
  double residual(const NCPoly& p) const;

 private:
  int degree_;
  int rank_ = 0;
  Eigen::MatrixXcd basis_;  // orthonormal columns spanning the ideal part
};

// ---------------------------------------------------------------------------

// R^{+-}(z, w) = phi(hbar/2, z +- w) 1 (x) 1 + sum_alpha phi^{hbar/2}_alpha(z +- w) sigma_alpha (x) sigma_alpha
Mat R_pm(int sign, cplx z, cplx w, cplx hbar, const ModularPoint& m);

// L^(z) = sum_a (s_a S^_a + c_a) sigma_a,
//   s_0 = phi(hbar, z), s_alpha = phi^hbar_alpha(z), c_alpha = nu~_alpha phi^hbar_alpha(z - omega_alpha).
// The plus companion flips the sign of the sigma_alpha part.
struct QuantumLax {
  std::array<cplx, 4> s{};
  std::array<cplx, 4> c{};
  NCPoly entry(int i, int j) const;
};
QuantumLax quantum_lax(cplx hbar, const std::array<cplx, 3>& nu_tilde, cplx z, const ModularPoint& m,
                       bool plus = false);

struct ReflectionReport {
  double residual = 0;       // max over entries of the projection residual
  double channel_chain = 0;  // 1 (x) sigma_gamma channel identities at (z, w, hbar)
};
ReflectionReport reflection_residual(cplx z, cplx w, cplx hbar, const std::array<cplx, 3>& nu_tilde,
                                     const ModularPoint& m, const RelationOptions& opt = {});
// Entries (row-major 4 x 4) of R-(z-w) L^1 R+ L^2 - L^2 R+ L^1 R-, degree <= 2.
std::vector<NCPoly> reflection_difference(cplx z, cplx w, cplx hbar, const std::array<cplx, 3>& nu_tilde,
                                          const ModularPoint& m);

// C1 = sum_a S^_a^2,  C2 = sum_alpha K_a (K_a - K_b - K_g) S^_a^2 - 2 nu~_a rho_a K_a S^_a.
struct QuantumCasimirs {
  NCPoly c1, c2;
};
QuantumCasimirs quantum_casimirs(const RelationSet& rel);

struct CentralReport {
  double c1 = 0;  // max over generators of the ideal-projection residual of [C1, S^_a]
  double c2 = 0;
  int ideal_rank = 0;
};
CentralReport central_check(cplx hbar, const std::array<cplx, 3>& nu_tilde, const ModularPoint& m,
                            const RelationOptions& opt = {});
// Same, for an arbitrary candidate element.
double central_residual(const NCPoly& c, const IdealReducer& ideal);

// tr P (L^(z) (x) L'), P = 1 (x) 1 + sum sigma_alpha (x) sigma_alpha, with
// Mirror: L' = L^(-z, hbar);  Printed: L' = L^+(z, -hbar).
enum class QdetForm { Mirror, Printed };
struct QuantumDeterminant {
  NCPoly value;
  cplx unit = 0, c1 = 0, c2 = 0;  // coefficients on 1, C1, C2 after reduction
  double residual = 0;            // distance to span{relations, 1, C1, C2}, relative
};
QuantumDeterminant quantum_determinant(cplx z, cplx hbar, const std::array<cplx, 3>& nu_tilde,
                                       const ModularPoint& m, QdetForm form = QdetForm::Mirror);

// Classical limit S^_0 = hbar S0, hbar -> 0 of the relations, compared
// coefficient-wise with the Sklyanin table at nu' = nu'(nu~).  The coefficients
// are sampled at +-h1, +-h2 and extrapolated in h^2; returns the max deviation
// relative to the largest coefficient of each table entry.
double classical_limit_deviation(const std::array<cplx, 3>& nu_tilde, const ModularPoint& m,
                                 const RelationOptions& opt = {}, cplx h1 = 1e-3, cplx h2 = 1e-4);

}  // namespace ellwb
