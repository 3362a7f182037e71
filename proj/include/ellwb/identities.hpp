#pragma once
// Registry of functional identities between elliptic functions, evaluated as
// residuals.  Each case returns one or more equations, each written as a list of
// signed summands whose sum vanishes; the relative residual of an equation is
// |sum| / max |summand|.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ellwb/elliptic.hpp"

namespace ellwb {

// Evaluation context handed to identity bodies.  Every pole-sensitive argument
// is recorded so that the sampler can reject points close to a pole set.
class IdentityContext {
 public:
  explicit IdentityContext(cplx tau) : tau_(tau) {}

  cplx tau() const { return tau_; }
  const std::vector<cplx>& guarded() const { return guarded_; }

  cplx phi(cplx u, cplx z);
  cplx f(cplx u, cplx z);  // d phi / du
  cplx E1(cplx x);
  cplx E2(cplx x);
  cplx zeta(cplx x);
  cplx theta_num(cplx x);  // theta in a numerator: no guard
  cplx theta_den(cplx x);  // theta in a denominator: guarded
  cplx theta_prime0();
  cplx theta_k(int k, cplx x, cplx tau);  // Jacobi theta_k, k = 1..4, no guard
  // varphi_alpha(z), sigma labels alpha = 1..3
  cplx vp(int alpha, cplx z);
  // varphi^eta_alpha(z); alpha = 0 gives phi(eta, z)
  cplx vpe(int alpha, cplx eta, cplx z);
  cplx half_period(int alpha) const { return sigma_half_period(alpha, tau_); }
  double half_period_dtau(int alpha) const { return sigma_half_period_dtau(alpha); }

  void guard(cplx x) { guarded_.push_back(x); }

 private:
  cplx tau_;
  std::vector<cplx> guarded_;
};

using Equation = std::vector<cplx>;

struct IdentityCase {
  std::string id;
  std::string description;
  int arity = 0;
  std::function<std::vector<Equation>(IdentityContext&, const std::vector<cplx>&)> body;
};

struct CaseEvaluation {
  double residual = 0;  // max relative residual over the case's equations
  std::vector<cplx> params;
};

// Relative residual of one equation.
double relative_residual(const Equation& eq);

const std::vector<IdentityCase>& identity_registry();
const IdentityCase& find_identity(const std::string& id);

// Evaluates a case at explicit parameters (no rejection).  Pole errors propagate.
double residual(const IdentityCase& c, const std::vector<cplx>& params, cplx tau);
double residual(const std::string& id, const std::vector<cplx>& params, cplx tau);

// Copy of a case with its last summand sign-flipped in every equation.
IdentityCase corrupted(const IdentityCase& c);

struct CaseReport {
  std::string id;
  cplx tau;
  double max_residual = 0;
  bool pass = false;
  std::vector<cplx> worst_point;
  int samples = 0;
};

struct SuiteReport {
  std::vector<CaseReport> cases;
  bool all_pass() const;
};

// Draws params x + y tau with x, y uniform in [-1/2, 1/2), rejecting samples
// whose guarded arguments come within `margin` of the lattice.
std::vector<cplx> sample_point(const IdentityCase& c, cplx tau, std::mt19937_64& rng,
                               double margin = 0.05);

SuiteReport run_suite(int samples_per_case, double tol, std::uint64_t seed,
                      const std::vector<cplx>& taus,
                      const std::vector<IdentityCase>& cases = identity_registry());

}  // namespace ellwb
