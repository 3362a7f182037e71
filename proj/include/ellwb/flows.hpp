#pragma once
// Flows of the autonomous and isomonodromic systems and an adaptive
// Dormand-Prince 5(4) integrator along straight complex paths.
//
// Time normalisation: autonomous flows run in the time of their Lax pairs,
// isomonodromic flows satisfy kappa d_tau = (1 / 2 pi i) x (autonomous right-hand side).

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ellwb/elliptic.hpp"
#include "ellwb/lax.hpp"

namespace ellwb {

enum class FlowKind { PVI_RATIONAL, EPVI, CI, CM_SPIN, NACM, ET, NAET, ZVG, NAZVG };

const char* flow_name(FlowKind k);
bool is_tau_flow(FlowKind k);  // EPVI, NACM, NAET, NAZVG

// How the constants of the elliptic form map to (alpha, beta, gamma, delta).
//   Squared: alpha_j = nu_j^2 / (2 kappa^2), (alpha_0..3) = (alpha, -beta, gamma, 1/2 - delta)
//   Raw:     alpha_j = nu_j
enum class PviReading { Squared, Raw };

struct FlowParams {
  cplx tau = cplx(0, 1);           // modulus of autonomous flows
  cplx kappa = 1.0;                // level of isomonodromic flows
  int N = 2;                       // CM_SPIN, NACM, ET, NAET
  std::array<cplx, 4> nu{};        // CI / EPVI couplings at omega_0..omega_3
  std::array<cplx, 3> nu_tilde{};  // ZVG / NAZVG constants in the sigma basis
  std::array<cplx, 4> pvi{};       // alpha, beta, gamma, delta
  cplx j_shift = 0;                // J_alpha = E2(omega_alpha) + j_shift
};

// time(s) = t0 + s * direction, s in [0, s_end].  For tau-flows time is tau.
struct FlowSpec {
  FlowKind kind = FlowKind::ZVG;
  FlowParams params;
  cplx t0 = 0;
  cplx direction = 1.0;
  double s_end = 1.0;
  double im_floor = 0.2;
};

// PVI parameters implied by EPVI constants under a reading.
std::array<cplx, 4> pvi_from_epvi(const std::array<cplx, 4>& nu, cplx kappa, PviReading reading);

// d state / d time.  State layouts:
//   PVI_RATIONAL (X, dX/dt); EPVI, CI (u, v); CM_SPIN, NACM CMState::pack();
//   ET, NAET S over sl_basis_indices(N); ZVG, NAZVG (S1, S2, S3).
std::vector<cplx> flow_rhs(const FlowSpec& spec, cplx time, const std::vector<cplx>& state);

// Right-hand side in the form taken by lax_residual (time = tau for tau-flows).
StateRhs lax_rhs(const FlowSpec& spec);

// Pieces shared with other modules.
std::array<cplx, 3> zvg_j(cplx tau, cplx shift = 0);  // J_alpha, sigma labels
std::array<cplx, 3> cross3(const std::array<cplx, 3>& a, const std::array<cplx, 3>& b);
// Autonomous ZVG: dS/dt = -2i (S x JS - S x nu')
std::array<cplx, 3> zvg_velocity(const std::array<cplx, 3>& S, const std::array<cplx, 3>& J,
                                 const std::array<cplx, 3>& nu_prime);
// Autonomous ET: coefficients of [J.S, S]
std::vector<cplx> top_velocity(const std::vector<cplx>& S, int N, cplx tau);
// (1/2) sum nu_a^2 E2'(u - omega_a)
cplx ci_force(cplx u, const std::array<cplx, 4>& nu, cplx tau);

// ---------------------------------------------------------------------------

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h0 = 0;  // 0: automatic
  double h_min = 1e-13;
  long max_steps = 500000;
  bool fixed_step = false;  // take h0 steps without error control (order studies)
};

struct TrajectorySample {
  double s = 0;
  cplx time = 0;
  std::vector<cplx> state;
  double h = 0;
  double error = 0;  // scaled local error estimate of the accepted step
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  long rejected = 0;
  const TrajectorySample& back() const { return samples.back(); }
};

class SingularityError : public std::runtime_error {
 public:
  SingularityError(const std::string& what, Trajectory partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }
  const TrajectorySample& last_good() const { return partial_.back(); }

 private:
  Trajectory partial_;
};

using PathRhs = std::function<std::vector<cplx>(double s, const std::vector<cplx>& y)>;

// Integrates dy/ds = f(s, y) for real s in [0, s_end].  A PoleError raised
// inside a trial step counts as a rejection.
Trajectory integrate_path(const PathRhs& f, std::vector<cplx> y0, double s_end, const IntegratorOptions& opt,
                          const std::function<cplx(double)>& time_of = nullptr);

Trajectory integrate(const FlowSpec& spec, std::vector<cplx> y0, const IntegratorOptions& opt = {});

// ---------------------------------------------------------------------------

struct Quantity {
  std::string name;
  std::function<cplx(cplx time, const std::vector<cplx>& state)> eval;
};

struct QuantityDrift {
  std::string name;
  cplx initial = 0;
  double max_drift = 0;
};

struct ConservedReport {
  bool conservation_expected = true;  // false for non-autonomous flows (drift only logged)
  std::vector<QuantityDrift> quantities;
  const QuantityDrift& get(const std::string& name) const;
};

ConservedReport conserved_report(const FlowSpec& spec, const Trajectory& traj, const std::vector<Quantity>& q);

// Hamiltonian, Casimir and tr L^2(z0) as applicable to the flow.
std::vector<Quantity> standard_quantities(const FlowSpec& spec, cplx z0);

// ---------------------------------------------------------------------------

struct PviPoint {
  cplx tau, u, du, X, t;
  double residual = 0;
};

struct PviReport {
  PviReading reading;
  std::array<cplx, 4> pvi{};  // alpha, beta, gamma, delta used
  double max_residual = 0;
  double max_inversion_error = 0;  // |tau(t(tau)) - tau| over the path
  std::vector<PviPoint> points;
};

// X = (E2(u) - e1)/(e2 - e1), t = (e3 - e1)/(e2 - e1); derivatives of X(t)
// from Taylor jets of u(tau) generated by the EPVI equation.
PviReport pvi_crosscheck(const FlowSpec& epvi, const Trajectory& traj, PviReading reading = PviReading::Squared);

// Relative residual of the rational Painleve VI equation at (X, X', X'', t).
double pvi_residual(cplx X, cplx Xd, cplx Xdd, cplx t, const std::array<cplx, 4>& pvi);

// (X, t) of (u, tau) and local inversion of t(tau) by Newton's method.
std::pair<cplx, cplx> pvi_coordinates(cplx u, cplx tau);
cplx tau_from_t(cplx t, cplx tau_guess);

}  // namespace ellwb
