#pragma once
// Lax matrices of the elliptic Calogero-Moser, Calogero-Inozemtsev, elliptic top
// and Zhukovsky-Volterra gyrostat families, autonomous and isomonodromic, plus
// the generic Garnier-Gaudin matrices of degree 0 and 1.
//
// Quasi-periodicity convention, for every builder:
//   L(z+1)   = g1^{-1} L(z) g1
//   L(z+tau) = gtau^{-1} L(z) gtau + shift * Id

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ellwb/elliptic.hpp"
#include "ellwb/jet.hpp"

namespace ellwb {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Coincident particles or marked points.
class ConfigurationError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Max absolute entry.
double max_abs(const Mat& a);

// sigma_0..sigma_3
const Mat& pauli(int a);

// T_a = (N / 2 pi i) e_N(a1 a2 / 2) Q^a1 Lambda^a2, canonical representative of a.
Mat t_matrix(const LatticeIndex& a);
Mat clock_matrix(int N);  // Q = diag(e_N(1), ..., e_N(N))
Mat shift_matrix(int N);  // Lambda
// Coefficients of a traceless matrix over T_a, ordered as sl_basis_indices(N).
std::vector<cplx> t_coefficients(const Mat& x, int N);
Mat from_t_coefficients(const std::vector<cplx>& s, int N);
// C(a, b) = (N / pi) sin(pi (a x b) / N)
double structure_constant(const LatticeIndex& a, const LatticeIndex& b);

// ---------------------------------------------------------------------------
// States

struct CMState {
  int N = 2;
  std::vector<cplx> u, v;
  Mat p;

  // Spinless orbit: p = nu (ones - Id).
  static CMState spinless(const std::vector<cplx>& u, const std::vector<cplx>& v, cplx nu);
  void validate() const;
  std::vector<cplx> pack() const;  // u, v, p row-major
  static CMState unpack(int N, const std::vector<cplx>& s);
};

struct GyroState {
  cplx S0 = 0;
  std::array<cplx, 3> S{};        // S_1..S_3 in the sigma basis
  std::array<cplx, 4> nu_tilde{};  // nu~_0..nu~_3; nu~_0 used only by CI
  std::array<cplx, 3> nu_prime{};  // derived from nu_tilde at tau
  cplx casimir = 0;                // sum S_alpha^2 at construction

  static GyroState make(const std::array<cplx, 3>& S, const std::array<cplx, 3>& nu_tilde_sigma, cplx tau);
  std::vector<cplx> pack() const { return {S[0], S[1], S[2]}; }
};

// nu'_alpha = -nu~_alpha e(-omega_alpha d_tau omega_alpha) (theta'(0)/theta(omega_alpha))^2
std::array<cplx, 3> nu_prime_from_tilde(const std::array<cplx, 3>& nu_tilde_sigma, cplx tau);

struct CIState {
  cplx u = 0, v = 0;
  std::array<cplx, 4> nu_tilde{};
};

// nu~ = (1/2) H nu, H the 4x4 +-1 matrix; the map is an involution.
std::array<cplx, 4> ci_nu_tilde(const std::array<cplx, 4>& nu);
std::array<cplx, 4> ci_nu(const std::array<cplx, 4>& nu_tilde);

struct TopState {
  int N = 2;
  std::vector<cplx> S;  // over sl_basis_indices(N)
};

// ---------------------------------------------------------------------------
// Lax fields

namespace detail {

// First-order jet in (state direction, z, tau).
using D1 = Jet<3, 1>;

enum class Part { L, M };

class LaxModel {
 public:
  virtual ~LaxModel() = default;
  virtual int size() const = 0;
  virtual bool has_m() const = 0;
  virtual std::vector<cplx> eval(Part p, const std::vector<cplx>& s, cplx z, cplx tau) const = 0;
  virtual std::vector<D1> eval(Part p, const std::vector<D1>& s, const D1& z, const D1& tau) const = 0;
};

}  // namespace detail

struct Multipliers {
  Mat g1, gtau;
  cplx tau_shift = 0;  // scalar added under z -> z + tau
};

struct PoleData {
  cplx point;
  int order = 1;
  std::optional<Mat> residue;
};

class LaxField {
 public:
  LaxField() = default;
  LaxField(std::shared_ptr<const detail::LaxModel> model, detail::Part part, std::vector<cplx> state, cplx tau,
           cplx kappa, Multipliers mult, std::vector<PoleData> poles);

  int N() const { return n_; }
  cplx tau() const { return tau_; }
  cplx kappa() const { return kappa_; }
  const std::vector<cplx>& state() const { return state_; }
  const Multipliers& multipliers() const { return mult_; }
  const std::vector<PoleData>& poles() const { return poles_; }
  bool isomonodromic() const { return kappa_ != cplx(0.0); }

  Mat operator()(cplx z) const;
  Mat dz(cplx z) const;
  // Explicit tau-derivative at fixed state.
  Mat dtau(cplx z) const;
  // Derivative of the matrix along a state direction at fixed (z, tau).
  Mat dstate(cplx z, const std::vector<cplx>& direction) const;
  // Same field with another state (and tau).
  LaxField with_state(std::vector<cplx> state, cplx tau) const;
  LaxField with_state(std::vector<cplx> state) const { return with_state(std::move(state), tau_); }

 private:
  std::vector<detail::D1> jet_eval(cplx z, const std::vector<cplx>& direction) const;

  std::shared_ptr<const detail::LaxModel> model_;
  detail::Part part_ = detail::Part::L;
  std::vector<cplx> state_;
  cplx tau_ = cplx(0, 1), kappa_ = 0;
  int n_ = 0;
  Multipliers mult_;
  std::vector<PoleData> poles_;
};

struct LaxPair {
  LaxField L, M;
};

// L = P + X, X_jk = p_jk phi(u_j - u_k, w); M_jk = p_jk f(u_j - u_k, w), diag M = 0.
LaxPair build_cm_lax(const CMState& state, const ModularPoint& m);

// L = -(kappa/N) E1(w) Id + sum S_a varphi_a(w) T_a.
// kappa = 0: M = sum S_a f_a(w) T_a; otherwise the isomonodromic M of build_nonautonomous.
LaxPair build_top_lax(const TopState& S, const ModularPoint& m, cplx kappa = 0);

// L = [[v, X12], [X21, -v]], X12 = sum nu~_a e(2u d_tau omega_a) phi(2u, z + omega_a), X21 = X12(-u).
// M replaces each term by its derivative in x = 2u.
LaxPair build_ci_lax(const CIState& state, const ModularPoint& m);

// L = sum (S_a varphi_a(z) + nu~_a varphi_a(z - omega_a)) sigma_a,
// M = -sum S_a varphi_1 varphi_2 varphi_3 / varphi_a sigma_a + E1(z) L.
LaxPair build_zvg_lax(const GyroState& g, const ModularPoint& m);
// The equivalent form sum (S_a varphi_a(z) + nu'_a / varphi_a(z)) sigma_a.
Mat zvg_lax_nu_prime_form(const GyroState& g, const ModularPoint& m, cplx z);

enum class NonAutonomousKind { CI, ZVG, ET, CM };
using AnyState = std::variant<CIState, GyroState, TopState, CMState>;

// Isomonodromic pairs satisfying d_tau L - d_w M - (1/kappa)[L, M] = 0.
LaxPair build_nonautonomous(NonAutonomousKind kind, const AnyState& state, const ModularPoint& m, cplx kappa);

enum class BundleDegree { Zero, One };

// Degree 0: L_ij = delta_ij (v_i + sum_a p^a_ii E1(z - z_a)) + (1 - delta_ij) sum_a p^a_ij phi(u_i - u_j, z - z_a).
// Degree 1: L = sum_a sum_alpha S^a_alpha varphi_alpha(z - z_a) T_alpha, spins over sl_basis_indices(N).
struct GenericEggData {
  BundleDegree degree = BundleDegree::Zero;
  int N = 2;
  std::vector<cplx> marked_points;
  std::vector<Mat> residues;                  // degree 0: p^a
  std::vector<std::vector<cplx>> spins;       // degree 1: S^a over T basis
  std::vector<cplx> u, v;                     // degree 0 moduli and momenta
};
LaxField build_generic_egg(const GenericEggData& data, const ModularPoint& m);

// ---------------------------------------------------------------------------
// Checks

double quasi_periodicity_residual(const LaxField& L, cplx z);

// (1 / 2 pi i) contour integral of (z - p)^(-k-1) F(z) over |z - p| = radius.
Mat laurent_coefficient(const LaxField& F, cplx point, int k, double radius = 0.05, int points = 64);
double residue_residual(const LaxField& L, std::size_t pole, double radius = 0.05, int points = 64);

struct SpectralFit {
  std::vector<std::string> labels;  // "1", "E2(z-z0)", ...
  std::vector<cplx> coefficients;
  double residual = 0;
  double condition = 0;
  cplx coefficient(const std::string& label) const;
};

// Least-squares fit of (1/j) tr L^j(z) against {1, E_i(z - z_a) : i = 1..max_order, a}.
// max_order = 0 means j.
SpectralFit spectral_invariants(const LaxField& L, int j, const std::vector<cplx>& z_samples,
                                const std::vector<cplx>& marked_points, int max_order = 0);

using StateRhs = std::function<std::vector<cplx>(const std::vector<cplx>& state, cplx tau)>;

// kappa = 0: max |dL/dt - [L, M]| with dL/dt along eom.
// kappa != 0: max |d_tau L - d_w M - (1/kappa)[L, M]| with d_tau L = explicit + state flow.
double lax_residual(const LaxField& L, const LaxField& M, const StateRhs& eom, cplx kappa, cplx z);

// Hamiltonians read off from (1/4) tr L^2.
cplx ci_hamiltonian(const CIState& s, const ModularPoint& m);  // v^2/2 - (1/2) sum nu_a^2 E2(u - omega_a)
// (1/2) sum e_alpha S_alpha^2 - sum nu'_alpha S_alpha, e_alpha = E2(omega_alpha)
cplx zvg_hamiltonian(const GyroState& g, const ModularPoint& m);
// (1/2) sum v_j^2 - sum_{j>k} p_jk p_kj E2(u_j - u_k)
cplx cm_hamiltonian(const CMState& s, const ModularPoint& m);

}  // namespace ellwb
