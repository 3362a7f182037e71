#include "ellwb/hecke.hpp"

#include <cmath>
#include <limits>

namespace ellwb {

ModificationMatrix::ModificationMatrix(std::vector<cplx> u, std::vector<cplx> r, cplx tau)
    : u_(std::move(u)), r_(std::move(r)), tau_(tau) {
  const int n = N();
  if (n < 2 || static_cast<int>(r_.size()) != n)
    throw std::invalid_argument("build_xi: u and r must have the same length N >= 2");
  detail::require_upper_half_plane(tau_);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < j; ++k)
      if (!is_regular(u_[j] - u_[k], tau_, 1e-10))
        throw ConfigurationError("build_xi: moduli u_" + std::to_string(k) + " and u_" + std::to_string(j) +
                                 " coincide modulo the lattice");
  scale_ = Mat::Zero(n, n);
  for (int l = 0; l < n; ++l) {
    if (std::abs(r_[l]) == 0.0) throw DomainError("build_xi: eigenvector r has a zero component");
    scale_(l, l) = ((l + 1) % 2 == 0 ? 1.0 : -1.0) / r_[l];
  }
}

Mat ModificationMatrix::eval(cplx z, int dz) const {
  const int n = N();
  const double nd = n;
  Mat x(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      x(i, j) = theta_char((i + 1) / nd - 0.5, 0.5 * nd, z - nd * u_[j], nd * tau_, dz);
  return x;
}

Mat ModificationMatrix::tilde(cplx z) const { return eval(z, 0); }
Mat ModificationMatrix::operator()(cplx z) const { return eval(z, 0) * scale_; }
Mat ModificationMatrix::dz(cplx z, int order) const { return eval(z, order) * scale_; }

Vec ModificationMatrix::kernel_vector() const {
  const int n = N();
  Vec k(n);
  for (int l = 0; l < n; ++l) {
    cplx p = ((l + 1) % 2 == 0) ? 1.0 : -1.0;
    for (int kk = 0; kk < n; ++kk)
      for (int j = 0; j < kk; ++j)
        if (j != l && kk != l) p *= theta(u_[kk] - u_[j], tau_);
    k(l) = p;
  }
  return k;
}

Mat ModificationMatrix::shift_one() const { return -clock_matrix(N()); }
Mat ModificationMatrix::shift_tau() const { return shift_matrix(N()); }

ModificationMatrix build_xi(const std::vector<cplx>& u, const std::vector<cplx>& r, const ModularPoint& m) {
  return ModificationMatrix(u, r, m.tau);
}

// ---------------------------------------------------------------------------

namespace {

using detail::D1;
using detail::Part;

class GaugedModel : public detail::LaxModel {
 public:
  GaugedModel(ModificationMatrix xi, LaxField l0, cplx kappa)
      : xi_(std::move(xi)), l0_(std::move(l0)), kappa_(kappa) {}

  int size() const override { return xi_.N(); }
  bool has_m() const override { return false; }

  std::vector<cplx> eval(Part, const std::vector<cplx>& s, cplx z, cplx tau) const override {
    check(s, tau);
    return flatten(value(z));
  }

  std::vector<D1> eval(Part, const std::vector<D1>& s, const D1& z, const D1& tau) const override {
    std::vector<cplx> sv;
    for (const auto& x : s) sv.push_back(x.value());
    check(sv, tau.value());
    const cplx z0 = z.value();
    const Mat v = value(z0);
    const Mat dv = derivative(z0);
    const int n = size();
    std::vector<D1> out(n * n);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        D1 e(v(i, j));
        e.c[1] = cplx(nan, nan);
        e.c[2] = dv(i, j) * z.c[2];
        e.c[3] = cplx(nan, nan);
        out[i * n + j] = e;
      }
    return out;
  }

 private:
  void check(const std::vector<cplx>& s, cplx tau) const {
    if (s != l0_.state() || tau != l0_.tau())
      throw std::logic_error("modified Lax field: the modification is fixed at the state it was built from");
  }

  Mat inverse(cplx z) const {
    const Mat x = xi_(z);
    Eigen::FullPivLU<Mat> lu(x);
    if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-14 * std::pow(std::max(1.0, max_abs(x)), xi_.N()))
      throw SingularModificationError("modify_lax: Xi is singular at the requested z");
    return lu.inverse();
  }

  Mat value(cplx z) const {
    const Mat x = xi_(z), xinv = inverse(z);
    const Mat dxinv = -xinv * xi_.dz(z) * xinv;
    return kappa_ * x * dxinv + x * l0_(z) * xinv;
  }

  Mat derivative(cplx z) const {
    const Mat x = xi_(z), xinv = inverse(z), x1 = xi_.dz(z);
    const Mat x2 = xi_.dz(z, 2);
    const Mat dinv = -xinv * x1 * xinv;
    const Mat ddinv = -dinv * x1 * xinv - xinv * x2 * xinv - xinv * x1 * dinv;
    const Mat l = l0_(z), dl = l0_.dz(z);
    return kappa_ * (x1 * dinv + x * ddinv) + x1 * l * xinv + x * dl * xinv + x * l * dinv;
  }

  static std::vector<cplx> flatten(const Mat& m) {
    std::vector<cplx> out(m.size());
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
    return out;
  }

  ModificationMatrix xi_;
  LaxField l0_;
  cplx kappa_;
};

}  // namespace

LaxField modify_lax(const ModificationMatrix& xi, const LaxField& L0, cplx kappa) {
  const int n = xi.N();
  if (L0.N() != n) throw std::invalid_argument("modify_lax: size mismatch between Xi and L0");
  if (L0.tau() != xi.tau()) throw std::invalid_argument("modify_lax: Xi and L0 live on different curves");
  const auto& g = L0.multipliers();
  Mat d = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j) d(j, j) = e(xi.u()[j]);
  if (max_abs(g.g1 - Mat::Identity(n, n)) > 1e-12 || max_abs(g.gtau - d) > 1e-9)
    throw std::invalid_argument("modify_lax: L0 must be a degree-zero field over the moduli of Xi");
  // scalar factors of the Xi multipliers drop out of the conjugation
  Multipliers mult{clock_matrix(n).inverse(), xi.shift_tau().inverse(),
                   g.tau_shift + two_pi_i * kappa / static_cast<double>(n)};
  std::vector<PoleData> poles{{0.0, 1, std::nullopt}};
  for (const auto& p : L0.poles())
    if (is_regular(p.point, xi.tau())) poles.push_back({p.point, p.order, std::nullopt});
  auto model = std::make_shared<GaugedModel>(xi, L0, kappa);
  return LaxField(model, detail::Part::L, L0.state(), L0.tau(), L0.kappa(), mult, poles);
}

std::array<cplx, 4> sigma_components(const Mat& x) {
  if (x.rows() != 2 || x.cols() != 2) throw std::invalid_argument("sigma_components: 2 x 2 matrix expected");
  std::array<cplx, 4> c{};
  for (int a = 0; a < 4; ++a) c[a] = 0.5 * (pauli(a) * x).trace();
  return c;
}

// ---------------------------------------------------------------------------

std::array<cplx, 3> gyro_nu_tilde(const std::array<cplx, 4>& nt) { return {-nt[2], nt[3], nt[1]}; }

ConstantMaps constant_maps(const std::array<cplx, 4>& nu, const ModularPoint& m) {
  ConstantMaps c;
  c.nu_tilde = ci_nu_tilde(nu);
  c.nu_tilde_sigma = gyro_nu_tilde(c.nu_tilde);
  c.nu_prime = nu_prime_from_tilde(c.nu_tilde_sigma, m.tau);
  return c;
}

namespace {

// (S_sigma1, S_sigma2, S_sigma3) as functions of (u, v, tau).
template <class T>
std::array<T, 3> upper_modification(const T& u, const T& v, const std::array<cplx, 4>& n, cplx kappa, const T& tau) {
  const T zero(0.0);
  const T x = u * 2.0;
  const T th = theta1(x, tau);
  const T th_sq = th * th;
  const T tp0 = theta1(zero, tau, 1);
  const T t20 = theta2(zero, tau), t30 = theta3(zero, tau), t40 = theta4(zero, tau);
  const T t2 = theta2(x, tau), t3 = theta3(x, tau), t4 = theta4(x, tau);
  const T d2 = theta2(x, tau, 1), d3 = theta3(x, tau, 1), d4 = theta4(x, tau, 1);
  const cplx hk = kappa / 2.0;
  const T s1 = -(v * t20 * t2) / (tp0 * th) - (t20 * d2) * hk / (tp0 * th) +
               (t20 * t20 * t3 * t4) * n[0] / (t30 * t40 * th_sq) + (t2 * t2) * n[1] / th_sq +
               (t20 * t2 * t4) * n[2] / (t40 * th_sq) + (t20 * t2 * t3) * n[3] / (t30 * th_sq);
  const T is2 = (v * t30 * t3) / (tp0 * th) + (t30 * d3) * hk / (tp0 * th) -
                (t30 * t30 * t2 * t4) * n[0] / (t20 * t40 * th_sq) - (t30 * t3 * t2) * n[1] / (t20 * th_sq) -
                (t30 * t3 * t4) * n[2] / (t40 * th_sq) - (t3 * t3) * n[3] / th_sq;
  const T s3 = -(v * t40 * t4) / (tp0 * th) - (t40 * d4) * hk / (tp0 * th) +
               (t40 * t40 * t2 * t3) * n[0] / (t20 * t30 * th_sq) + (t40 * t2 * t4) * n[1] / (t20 * th_sq) +
               (t4 * t4) * n[2] / th_sq + (t40 * t4 * t3) * n[3] / (t30 * th_sq);
  return {s3, is2 * (-I), s1};
}

void require_regular_double(cplx u, cplx tau) {
  if (!is_regular(2.0 * u, tau, 1e-10)) throw DomainError("cm_to_zvg_coords: 2u lies at a zero of theta");
}

}  // namespace

GyroState cm_to_zvg_coords(cplx u, cplx v, const std::array<cplx, 4>& nu_tilde, cplx kappa, const ModularPoint& m) {
  require_regular_double(u, m.tau);
  const auto s = upper_modification(u, v, nu_tilde, kappa, m.tau);
  return GyroState::make(s, gyro_nu_tilde(nu_tilde), m.tau);
}

CoordinateJacobian cm_to_zvg_jacobian(cplx u, cplx v, const std::array<cplx, 4>& nu_tilde, cplx kappa, cplx tau) {
  require_regular_double(u, tau);
  using J = Jet<3, 1>;
  const auto s = upper_modification(J::variable(0, u), J::variable(1, v), nu_tilde, kappa, J::variable(2, tau));
  CoordinateJacobian r;
  for (int a = 0; a < 3; ++a) {
    r.S[a] = s[a].value();
    for (int k = 0; k < 3; ++k) r.d[k][a] = s[a].d(k);
  }
  return r;
}

double pushforward_residual(const FlowSpec& spec, cplx time, const std::vector<cplx>& state) {
  const bool iso = spec.kind == FlowKind::EPVI;
  if (!iso && spec.kind != FlowKind::CI) throw std::invalid_argument("pushforward_residual: CI or EPVI flow expected");
  const cplx tau = iso ? time : spec.params.tau;
  const cplx kappa = iso ? spec.params.kappa : cplx(0.0);
  const auto nt = ci_nu_tilde(spec.params.nu);
  const auto jac = cm_to_zvg_jacobian(state[0], state[1], nt, kappa, tau);
  const auto d = flow_rhs(spec, time, state);
  std::array<cplx, 3> ds{};
  for (int a = 0; a < 3; ++a) ds[a] = jac.d[0][a] * d[0] + jac.d[1][a] * d[1] + (iso ? jac.d[2][a] : cplx(0.0));
  FlowSpec g;
  g.kind = iso ? FlowKind::NAZVG : FlowKind::ZVG;
  g.params.tau = tau;
  g.params.kappa = iso ? kappa : cplx(1.0);
  g.params.nu_tilde = gyro_nu_tilde(nt);
  const auto target = flow_rhs(g, time, {jac.S[0], jac.S[1], jac.S[2]});
  double r = 0, scale = 1;
  for (int a = 0; a < 3; ++a) {
    r = std::max(r, std::abs(ds[a] - target[a]));
    scale = std::max(scale, std::abs(ds[a]));
  }
  return r / scale;
}

}  // namespace ellwb
