#include "ellwb/lax.hpp"

#include <cstdio>

namespace ellwb {

using detail::D1;
using detail::Part;

double max_abs(const Mat& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

const Mat& pauli(int a) {
  static const std::array<Mat, 4> s = [] {
    std::array<Mat, 4> r;
    for (auto& x : r) x = Mat::Zero(2, 2);
    r[0] << 1, 0, 0, 1;
    r[1] << 0, 1, 1, 0;
    r[2] << 0, cplx(0, -1), cplx(0, 1), 0;
    r[3] << 1, 0, 0, -1;
    return r;
  }();
  return s.at(a);
}

Mat clock_matrix(int N) {
  Mat q = Mat::Zero(N, N);
  for (int j = 0; j < N; ++j) q(j, j) = e_N(static_cast<double>(j + 1), N);
  return q;
}

Mat shift_matrix(int N) {
  Mat l = Mat::Zero(N, N);
  for (int j = 0; j < N; ++j) l(j, (j + 1) % N) = 1.0;
  return l;
}

Mat t_matrix(const LatticeIndex& a) {
  const auto c = a.canonical();
  const int N = c.N;
  Mat q = Mat::Identity(N, N), l = Mat::Identity(N, N);
  const Mat Q = clock_matrix(N), L = shift_matrix(N);
  for (int i = 0; i < c.a1; ++i) q = q * Q;
  for (int i = 0; i < c.a2; ++i) l = l * L;
  return (static_cast<double>(N) / two_pi_i) * e_N(0.5 * c.a1 * c.a2, N) * q * l;
}

std::vector<cplx> t_coefficients(const Mat& x, int N) {
  std::vector<cplx> out;
  for (const auto& g : sl_basis_indices(N)) {
    const Mat tm = t_matrix(-g), tg = t_matrix(g);
    out.push_back((tm * x).trace() / (tm * tg).trace());
  }
  return out;
}

Mat from_t_coefficients(const std::vector<cplx>& s, int N) {
  const auto idx = sl_basis_indices(N);
  if (s.size() != idx.size()) throw std::invalid_argument("from_t_coefficients: expected N^2 - 1 coefficients");
  Mat out = Mat::Zero(N, N);
  for (std::size_t i = 0; i < idx.size(); ++i) out += s[i] * t_matrix(idx[i]);
  return out;
}

double structure_constant(const LatticeIndex& a, const LatticeIndex& b) {
  return a.N / pi * std::sin(pi * cross(a, b) / a.N);
}

// ---------------------------------------------------------------------------

CMState CMState::spinless(const std::vector<cplx>& u, const std::vector<cplx>& v, cplx nu) {
  CMState s;
  s.N = static_cast<int>(u.size());
  s.u = u;
  s.v = v;
  s.p = nu * (Mat::Ones(s.N, s.N) - Mat::Identity(s.N, s.N));
  return s;
}

void CMState::validate() const {
  if (N < 2) throw std::invalid_argument("CMState: N >= 2 required");
  if (static_cast<int>(u.size()) != N || static_cast<int>(v.size()) != N || p.rows() != N || p.cols() != N)
    throw std::invalid_argument("CMState: inconsistent sizes");
  cplx su = 0, sv = 0;
  for (int j = 0; j < N; ++j) su += u[j], sv += v[j];
  if (std::abs(su) > 1e-12 || std::abs(sv) > 1e-12)
    throw std::invalid_argument("CMState: centre of mass constraints sum u = sum v = 0 violated");
}

std::vector<cplx> CMState::pack() const {
  std::vector<cplx> s(u);
  s.insert(s.end(), v.begin(), v.end());
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k) s.push_back(p(j, k));
  return s;
}

CMState CMState::unpack(int N, const std::vector<cplx>& s) {
  CMState c;
  c.N = N;
  c.u.assign(s.begin(), s.begin() + N);
  c.v.assign(s.begin() + N, s.begin() + 2 * N);
  c.p = Mat(N, N);
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k) c.p(j, k) = s[2 * N + j * N + k];
  return c;
}

std::array<cplx, 3> nu_prime_from_tilde(const std::array<cplx, 3>& nt, cplx tau) {
  std::array<cplx, 3> out{};
  for (int a = 1; a <= 3; ++a) out[a - 1] = nt[a - 1] * nu_prime_factor(a, tau);
  return out;
}

GyroState GyroState::make(const std::array<cplx, 3>& S, const std::array<cplx, 3>& nts, cplx tau) {
  GyroState g;
  g.S = S;
  for (int a = 0; a < 3; ++a) g.nu_tilde[a + 1] = nts[a];
  g.nu_prime = nu_prime_from_tilde(nts, tau);
  g.casimir = S[0] * S[0] + S[1] * S[1] + S[2] * S[2];
  return g;
}

namespace {

constexpr int kHadamard[4][4] = {{1, 1, 1, 1}, {1, 1, -1, -1}, {1, -1, 1, -1}, {1, -1, -1, 1}};

std::array<cplx, 3> sigma_part(const std::array<cplx, 4>& nt) { return {nt[1], nt[2], nt[3]}; }

}  // namespace

std::array<cplx, 4> ci_nu_tilde(const std::array<cplx, 4>& nu) {
  std::array<cplx, 4> out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out[i] += 0.5 * kHadamard[i][j] * nu[j];
  return out;
}

std::array<cplx, 4> ci_nu(const std::array<cplx, 4>& nt) { return ci_nu_tilde(nt); }

// ---------------------------------------------------------------------------
// Models

namespace {

template <class T>
void add_scaled(std::vector<T>& out, const Mat& B, const T& c) {
  const int n = static_cast<int>(B.rows());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (B(i, j) != cplx(0.0)) out[i * n + j] += c * B(i, j);
}

template <class T>
T dtau_log_theta(const T& z, const T& tau) {
  return theta(z, tau, 2) / (theta(z, tau) * (4.0 * pi * I));
}

template <class Impl>
class Model final : public detail::LaxModel {
 public:
  explicit Model(Impl impl) : impl_(std::move(impl)) {}
  int size() const override { return impl_.N; }
  bool has_m() const override { return Impl::kHasM; }
  std::vector<cplx> eval(Part p, const std::vector<cplx>& s, cplx z, cplx tau) const override {
    return impl_.template eval<cplx>(p, s, z, tau);
  }
  std::vector<D1> eval(Part p, const std::vector<D1>& s, const D1& z, const D1& tau) const override {
    return impl_.template eval<D1>(p, s, z, tau);
  }

 private:
  Impl impl_;
};

template <class Impl>
std::shared_ptr<const detail::LaxModel> make_model(Impl impl) {
  return std::make_shared<Model<Impl>>(std::move(impl));
}

struct CMModel {
  static constexpr bool kHasM = true;
  int N;
  cplx m_scale;  // 1, or 1/(2 pi i) for the isomonodromic pair

  template <class T>
  std::vector<T> eval(Part part, const std::vector<T>& s, const T& z, const T& tau) const {
    std::vector<T> out(N * N, T(0.0));
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        if (j == k) {
          if (part == Part::L) out[j * N + k] = s[N + j];
          continue;
        }
        const T& pjk = s[2 * N + j * N + k];
        const T x = s[j] - s[k];
        out[j * N + k] = part == Part::L ? pjk * phi(x, z, tau) : pjk * f_kernel(x, z, tau) * m_scale;
      }
    return out;
  }
};

struct TopModel {
  static constexpr bool kHasM = true;
  int N;
  std::vector<LatticeIndex> idx;
  std::vector<Mat> basis;
  cplx kappa;
  bool iso;

  template <class T>
  std::vector<T> eval(Part part, const std::vector<T>& s, const T& z, const T& tau) const {
    std::vector<T> out(N * N, T(0.0));
    const Mat id = Mat::Identity(N, N);
    const double n = N;
    if (part == Part::L) {
      if (kappa != cplx(0.0)) add_scaled(out, id, T(-kappa / n) * E1(z, tau));
      for (std::size_t a = 0; a < idx.size(); ++a) add_scaled(out, basis[a], s[a] * varphi(idx[a], z, tau));
    } else {
      const cplx c = iso ? 1.0 / two_pi_i : cplx(1.0);
      if (iso) add_scaled(out, id, T(-kappa / n) * dtau_log_theta(z, tau));
      for (std::size_t a = 0; a < idx.size(); ++a) add_scaled(out, basis[a], s[a] * f_gamma(idx[a], z, tau) * c);
    }
    return out;
  }
};

struct CIModel {
  static constexpr bool kHasM = true;
  static constexpr int N = 2;
  std::array<cplx, 4> nt;
  cplx m_scale;

  template <class T>
  T x_entry(const T& x, const T& z, const T& tau) const {
    T r(0.0);
    for (int a = 0; a < 4; ++a) {
      if (nt[a] == cplx(0.0)) continue;
      r += nt[a] * e_of(x * half_period_dtau(a)) * phi(x, z + half_period(a, tau), tau);
    }
    return r;
  }
  template <class T>
  T y_entry(const T& x, const T& z, const T& tau) const {
    T r(0.0);
    for (int a = 0; a < 4; ++a) {
      if (nt[a] == cplx(0.0)) continue;
      const double c = half_period_dtau(a);
      const T w = z + half_period(a, tau);
      r += nt[a] * e_of(x * c) * (two_pi_i * c * phi(x, w, tau) + f_kernel(x, w, tau));
    }
    return r;
  }
  template <class T>
  std::vector<T> eval(Part part, const std::vector<T>& s, const T& z, const T& tau) const {
    const T x = 2.0 * s[0];
    if (part == Part::L) return {s[1], x_entry(x, z, tau), x_entry(-x, z, tau), -s[1]};
    return {T(0.0), y_entry(x, z, tau) * m_scale, y_entry(-x, z, tau) * m_scale, T(0.0)};
  }
};

struct ZVGModel {
  static constexpr bool kHasM = true;
  static constexpr int N = 2;
  std::array<cplx, 3> nt;
  cplx kappa;

  template <class T>
  std::array<T, 4> l_coeffs(const std::vector<T>& s, const T& z, const T& tau) const {
    std::array<T, 4> c{};
    c[0] = kappa == cplx(0.0) ? T(0.0) : T(-kappa / 2.0) * E1(z, tau);
    for (int a = 1; a <= 3; ++a) {
      c[a] = s[a - 1] * varphi_sigma(a, z, tau);
      if (nt[a - 1] != cplx(0.0)) c[a] += nt[a - 1] * varphi_sigma(a, z - sigma_half_period(a, tau), tau);
    }
    return c;
  }

  template <class T>
  std::vector<T> eval(Part part, const std::vector<T>& s, const T& z, const T& tau) const {
    std::array<T, 4> c{};
    if (part == Part::L) {
      c = l_coeffs(s, z, tau);
    } else if (kappa == cplx(0.0)) {
      const auto l = l_coeffs(s, z, tau);
      std::array<T, 4> p;
      for (int a = 1; a <= 3; ++a) p[a] = varphi_sigma(a, z, tau);
      const T e1 = E1(z, tau);
      c[0] = T(0.0);
      for (int a = 1; a <= 3; ++a) {
        T prod(1.0);
        for (int b = 1; b <= 3; ++b)
          if (b != a) prod *= p[b];
        c[a] = -1.0 * s[a - 1] * prod + e1 * l[a];
      }
    } else {
      c[0] = T(-kappa / 2.0) * dtau_log_theta(z, tau);
      for (int a = 1; a <= 3; ++a) {
        c[a] = s[a - 1] * f_sigma(a, z, tau) / two_pi_i;
        if (nt[a - 1] != cplx(0.0)) {
          const T w = z - sigma_half_period(a, tau);
          c[a] += nt[a - 1] * (f_sigma(a, w, tau) / two_pi_i -
                               sigma_half_period_dtau(a) * varphi_sigma(a, w, tau));
        }
      }
    }
    std::vector<T> out(4, T(0.0));
    for (int a = 0; a < 4; ++a) add_scaled(out, pauli(a), c[a]);
    return out;
  }
};

struct Deg0Model {
  static constexpr bool kHasM = false;
  int N;
  std::vector<cplx> marked;
  std::vector<Mat> res;

  template <class T>
  std::vector<T> eval(Part, const std::vector<T>& s, const T& z, const T& tau) const {
    std::vector<T> out(N * N, T(0.0));
    for (int i = 0; i < N; ++i) out[i * N + i] = s[N + i];
    for (std::size_t a = 0; a < marked.size(); ++a) {
      const T w = z - marked[a];
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
          const cplx p = res[a](i, j);
          if (p == cplx(0.0)) continue;
          out[i * N + j] += i == j ? p * E1(w, tau) : p * phi(s[i] - s[j], w, tau);
        }
    }
    return out;
  }
};

struct Deg1Model {
  static constexpr bool kHasM = false;
  int N;
  std::vector<cplx> marked;
  std::vector<LatticeIndex> idx;
  std::vector<Mat> basis;

  template <class T>
  std::vector<T> eval(Part, const std::vector<T>& s, const T& z, const T& tau) const {
    std::vector<T> out(N * N, T(0.0));
    const std::size_t n = idx.size();
    for (std::size_t a = 0; a < marked.size(); ++a)
      for (std::size_t g = 0; g < n; ++g) {
        const T& c = s[a * n + g];
        if (value_of(c) == cplx(0.0) && !is_jet_v<T>) continue;
        add_scaled(out, basis[g], c * varphi(idx[g], z - marked[a], tau));
      }
    return out;
  }
};

Mat to_mat(const std::vector<cplx>& e, int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = e[i * n + j];
  return m;
}

Mat jet_part(const std::vector<D1>& e, int n, int var) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = var < 0 ? e[i * n + j].value() : e[i * n + j].d(var);
  return m;
}

Mat diag_phase(const std::vector<cplx>& u) {
  Mat g = Mat::Zero(u.size(), u.size());
  for (std::size_t j = 0; j < u.size(); ++j) g(j, j) = e(u[j]);
  return g;
}

void require_separated(const std::vector<cplx>& x, cplx tau, const char* what) {
  for (std::size_t j = 0; j < x.size(); ++j)
    for (std::size_t k = j + 1; k < x.size(); ++k)
      if (!is_regular(x[j] - x[k], tau)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s: entries %zu and %zu coincide modulo the lattice", what, j, k);
        throw ConfigurationError(buf);
      }
}

}  // namespace

// ---------------------------------------------------------------------------

LaxField::LaxField(std::shared_ptr<const detail::LaxModel> model, Part part, std::vector<cplx> state, cplx tau,
                   cplx kappa, Multipliers mult, std::vector<PoleData> poles)
    : model_(std::move(model)), part_(part), state_(std::move(state)), tau_(tau), kappa_(kappa),
      n_(model_->size()), mult_(std::move(mult)), poles_(std::move(poles)) {
  if (part_ == Part::M && !model_->has_m()) throw std::invalid_argument("LaxField: model has no M matrix");
}

Mat LaxField::operator()(cplx z) const { return to_mat(model_->eval(part_, state_, z, tau_), n_); }

std::vector<D1> LaxField::jet_eval(cplx z, const std::vector<cplx>& direction) const {
  std::vector<D1> s(state_.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = D1(state_[i]);
    if (i < direction.size()) s[i].c[1] = direction[i];
  }
  return model_->eval(part_, s, D1::variable(1, z), D1::variable(2, tau_));
}

Mat LaxField::dz(cplx z) const { return jet_part(jet_eval(z, {}), n_, 1); }
Mat LaxField::dtau(cplx z) const { return jet_part(jet_eval(z, {}), n_, 2); }
Mat LaxField::dstate(cplx z, const std::vector<cplx>& direction) const {
  return jet_part(jet_eval(z, direction), n_, 0);
}

LaxField LaxField::with_state(std::vector<cplx> state, cplx tau) const {
  LaxField f = *this;
  f.state_ = std::move(state);
  f.tau_ = tau;
  return f;
}

// ---------------------------------------------------------------------------
// Builders

namespace {

LaxPair cm_pair(const CMState& st, const ModularPoint& m, cplx kappa) {
  st.validate();
  require_separated(st.u, m.tau, "CM coordinates");
  const int N = st.N;
  auto model = make_model(CMModel{N, kappa == cplx(0.0) ? cplx(1.0) : 1.0 / two_pi_i});
  Multipliers mult{Mat::Identity(N, N), diag_phase(st.u), 0.0};
  Mat res = st.p;
  res.diagonal().setZero();
  const auto s = st.pack();
  return {LaxField(model, Part::L, s, m.tau, kappa, mult, {{0.0, 1, res}}),
          LaxField(model, Part::M, s, m.tau, kappa, mult, {})};
}

LaxPair top_pair(const TopState& st, const ModularPoint& m, cplx kappa) {
  const int N = st.N;
  if (N < 2) throw std::invalid_argument("top: N >= 2 required");
  TopModel tm{N, sl_basis_indices(N), {}, kappa, kappa != cplx(0.0)};
  if (st.S.size() != tm.idx.size()) throw std::invalid_argument("top: expected N^2 - 1 coefficients");
  for (const auto& g : tm.idx) tm.basis.push_back(t_matrix(g));
  auto model = make_model(tm);
  Multipliers mult{clock_matrix(N), shift_matrix(N), two_pi_i * kappa / static_cast<double>(N)};
  const Mat res = from_t_coefficients(st.S, N) - (kappa / static_cast<double>(N)) * Mat::Identity(N, N);
  return {LaxField(model, Part::L, st.S, m.tau, kappa, mult, {{0.0, 1, res}}),
          LaxField(model, Part::M, st.S, m.tau, kappa, mult, {})};
}

LaxPair ci_pair(const CIState& st, const ModularPoint& m, cplx kappa) {
  if (!is_regular(2.0 * st.u, m.tau))
    throw ConfigurationError("CI: 2u lies on the lattice (particle meets its mirror image)");
  auto model = make_model(CIModel{st.nu_tilde, kappa == cplx(0.0) ? cplx(1.0) : 1.0 / two_pi_i});
  Mat g = Mat::Zero(2, 2);
  g(0, 0) = e(st.u);
  g(1, 1) = e(-st.u);
  Multipliers mult{Mat::Identity(2, 2), g, 0.0};
  std::vector<PoleData> poles;
  for (int a = 0; a < 4; ++a) {
    Mat r = Mat::Zero(2, 2);
    r(0, 1) = st.nu_tilde[a] * e(2.0 * st.u * half_period_dtau(a));
    r(1, 0) = st.nu_tilde[a] * e(-2.0 * st.u * half_period_dtau(a));
    poles.push_back({-half_period(a, m.tau), 1, r});
  }
  const std::vector<cplx> s{st.u, st.v};
  return {LaxField(model, Part::L, s, m.tau, kappa, mult, poles),
          LaxField(model, Part::M, s, m.tau, kappa, mult, {})};
}

LaxPair zvg_pair(const GyroState& g, const ModularPoint& m, cplx kappa) {
  const auto nts = sigma_part(g.nu_tilde);
  auto model = make_model(ZVGModel{nts, kappa});
  Multipliers mult{pauli(3), pauli(1), kappa * pi * I};
  Mat r0 = -(kappa / 2.0) * pauli(0);
  for (int a = 1; a <= 3; ++a) r0 += g.S[a - 1] * pauli(a);
  std::vector<PoleData> lp{{0.0, 1, r0}};
  std::vector<PoleData> mp;
  for (int a = 1; a <= 3; ++a) {
    if (nts[a - 1] == cplx(0.0)) continue;
    const cplx w = sigma_half_period(a, m.tau);
    lp.push_back({w, 1, Mat(nts[a - 1] * pauli(a))});
    mp.push_back({w, 1, std::nullopt});
  }
  const auto s = g.pack();
  return {LaxField(model, Part::L, s, m.tau, kappa, mult, lp), LaxField(model, Part::M, s, m.tau, kappa, mult, mp)};
}

}  // namespace

LaxPair build_cm_lax(const CMState& state, const ModularPoint& m) { return cm_pair(state, m, 0.0); }

LaxPair build_top_lax(const TopState& S, const ModularPoint& m, cplx kappa) { return top_pair(S, m, kappa); }

LaxPair build_ci_lax(const CIState& state, const ModularPoint& m) { return ci_pair(state, m, 0.0); }

LaxPair build_zvg_lax(const GyroState& g, const ModularPoint& m) { return zvg_pair(g, m, 0.0); }

Mat zvg_lax_nu_prime_form(const GyroState& g, const ModularPoint& m, cplx z) {
  const auto np = nu_prime_from_tilde(sigma_part(g.nu_tilde), m.tau);
  Mat out = Mat::Zero(2, 2);
  for (int a = 1; a <= 3; ++a) {
    const cplx p = varphi_sigma(a, z, m.tau);
    out += (g.S[a - 1] * p + np[a - 1] / p) * pauli(a);
  }
  return out;
}

LaxPair build_nonautonomous(NonAutonomousKind kind, const AnyState& state, const ModularPoint& m, cplx kappa) {
  if (kappa == cplx(0.0)) throw std::invalid_argument("build_nonautonomous: kappa must be nonzero");
  auto get = [&](auto* tag) -> const auto& {
    using S = std::remove_pointer_t<decltype(tag)>;
    if (!std::holds_alternative<S>(state)) throw std::invalid_argument("build_nonautonomous: state does not match kind");
    return std::get<S>(state);
  };
  switch (kind) {
    case NonAutonomousKind::CI: return ci_pair(get(static_cast<CIState*>(nullptr)), m, kappa);
    case NonAutonomousKind::ZVG: return zvg_pair(get(static_cast<GyroState*>(nullptr)), m, kappa);
    case NonAutonomousKind::ET: return top_pair(get(static_cast<TopState*>(nullptr)), m, kappa);
    case NonAutonomousKind::CM: return cm_pair(get(static_cast<CMState*>(nullptr)), m, kappa);
  }
  throw std::invalid_argument("build_nonautonomous: unknown kind");
}

LaxField build_generic_egg(const GenericEggData& d, const ModularPoint& m) {
  const int N = d.N;
  require_separated(d.marked_points, m.tau, "marked points");
  if (d.degree == BundleDegree::Zero) {
    if (d.residues.size() != d.marked_points.size() || static_cast<int>(d.u.size()) != N ||
        static_cast<int>(d.v.size()) != N)
      throw std::invalid_argument("generic egg (degree 0): inconsistent sizes");
    require_separated(d.u, m.tau, "bundle moduli u");
    Mat sum = Mat::Zero(N, N);
    for (const auto& r : d.residues) sum += r;
    if (sum.diagonal().cwiseAbs().maxCoeff() > 1e-12)
      throw ConfigurationError("generic egg (degree 0): diagonal parts of the residues must sum to zero");
    auto model = make_model(Deg0Model{N, d.marked_points, d.residues});
    std::vector<PoleData> poles;
    for (std::size_t a = 0; a < d.marked_points.size(); ++a) poles.push_back({d.marked_points[a], 1, d.residues[a]});
    std::vector<cplx> s(d.u);
    s.insert(s.end(), d.v.begin(), d.v.end());
    return LaxField(model, Part::L, s, m.tau, 0.0, {Mat::Identity(N, N), diag_phase(d.u), 0.0}, poles);
  }
  Deg1Model dm{N, d.marked_points, sl_basis_indices(N), {}};
  for (const auto& g : dm.idx) dm.basis.push_back(t_matrix(g));
  if (d.spins.size() != d.marked_points.size()) throw std::invalid_argument("generic egg (degree 1): one spin per point");
  std::vector<cplx> s;
  std::vector<PoleData> poles;
  for (std::size_t a = 0; a < d.spins.size(); ++a) {
    if (d.spins[a].size() != dm.idx.size()) throw std::invalid_argument("generic egg (degree 1): N^2 - 1 coefficients");
    s.insert(s.end(), d.spins[a].begin(), d.spins[a].end());
    poles.push_back({d.marked_points[a], 1, from_t_coefficients(d.spins[a], N)});
  }
  return LaxField(make_model(dm), Part::L, s, m.tau, 0.0, {clock_matrix(N), shift_matrix(N), 0.0}, poles);
}

// ---------------------------------------------------------------------------
// Checks

double quasi_periodicity_residual(const LaxField& L, cplx z) {
  const auto& g = L.multipliers();
  const Mat l0 = L(z);
  const Mat a = L(z + 1.0) - g.g1.inverse() * l0 * g.g1;
  const Mat b = L(z + L.tau()) - g.gtau.inverse() * l0 * g.gtau -
                g.tau_shift * Mat::Identity(L.N(), L.N());
  return std::max(max_abs(a), max_abs(b));
}

Mat laurent_coefficient(const LaxField& F, cplx point, int k, double radius, int points) {
  Mat acc = Mat::Zero(F.N(), F.N());
  for (int i = 0; i < points; ++i) {
    const cplx d = radius * std::exp(two_pi_i * (static_cast<double>(i) / points));
    acc += std::pow(d, -k) * F(point + d);
  }
  return acc / static_cast<double>(points);
}

double residue_residual(const LaxField& L, std::size_t pole, double radius, int points) {
  const auto& p = L.poles().at(pole);
  if (!p.residue) throw std::invalid_argument("residue_residual: pole has no declared residue");
  return max_abs(laurent_coefficient(L, p.point, -1, radius, points) - *p.residue);
}

cplx SpectralFit::coefficient(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return coefficients[i];
  throw std::invalid_argument("SpectralFit: no basis function " + label);
}

SpectralFit spectral_invariants(const LaxField& L, int j, const std::vector<cplx>& zs,
                                const std::vector<cplx>& marked, int max_order) {
  if (j < 1 || j > L.N()) throw std::invalid_argument("spectral_invariants: need 1 <= j <= N");
  if (max_order == 0) max_order = j;
  const ModularPoint m(L.tau());
  SpectralFit fit;
  fit.labels.push_back("1");
  for (int i = 1; i <= max_order; ++i)
    for (std::size_t a = 0; a < marked.size(); ++a)
      fit.labels.push_back("E" + std::to_string(i) + "(z-z" + std::to_string(a) + ")");
  const int nb = static_cast<int>(fit.labels.size());
  const int ns = static_cast<int>(zs.size());
  if (ns < nb)
    throw ConditioningError("spectral_invariants: " + std::to_string(ns) + " samples for " + std::to_string(nb) +
                            " basis functions; add samples");
  Mat A(ns, nb);
  Vec b(ns);
  for (int r = 0; r < ns; ++r) {
    const Mat l = L(zs[r]);
    Mat p = l;
    for (int k = 1; k < j; ++k) p = p * l;
    b(r) = p.trace() / static_cast<double>(j);
    A(r, 0) = 1.0;
    int c = 1;
    for (int i = 1; i <= max_order; ++i)
      for (cplx za : marked) A(r, c++) = eisenstein(i, zs[r] - za, m);
  }
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  fit.condition = sv(0) / sv(sv.size() - 1);
  if (!(fit.condition < 1e12))
    throw ConditioningError("spectral_invariants: ill-conditioned fit (condition " + std::to_string(fit.condition) +
                            "); add samples or move them away from the marked points");
  const Vec x = svd.solve(b);
  fit.coefficients.assign(x.data(), x.data() + x.size());
  fit.residual = (A * x - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
  return fit;
}

double lax_residual(const LaxField& L, const LaxField& M, const StateRhs& eom, cplx kappa, cplx z) {
  if (L.isomonodromic() && kappa == cplx(0.0))
    throw std::invalid_argument("lax_residual: isomonodromic pair needs kappa != 0");
  if (!L.isomonodromic() && kappa != cplx(0.0))
    throw std::invalid_argument("lax_residual: autonomous pair needs kappa = 0");
  const auto dir = eom(L.state(), L.tau());
  const Mat l = L(z), mm = M(z);
  const Mat com = l * mm - mm * l;
  const Mat flow = L.dstate(z, dir);
  if (kappa == cplx(0.0)) return max_abs(flow - com);
  return max_abs(L.dtau(z) + flow - M.dz(z) - com / kappa);
}

cplx ci_hamiltonian(const CIState& s, const ModularPoint& m) {
  const auto nu = ci_nu(s.nu_tilde);
  cplx h = 0.5 * s.v * s.v;
  for (int a = 0; a < 4; ++a) h -= 0.5 * nu[a] * nu[a] * E2(s.u - m.omega[a], m.tau);
  return h;
}

cplx zvg_hamiltonian(const GyroState& g, const ModularPoint& m) {
  const auto np = nu_prime_from_tilde(sigma_part(g.nu_tilde), m.tau);
  cplx h = 0;
  for (int a = 1; a <= 3; ++a) h += 0.5 * m.e_sigma(a) * g.S[a - 1] * g.S[a - 1] - np[a - 1] * g.S[a - 1];
  return h;
}

cplx cm_hamiltonian(const CMState& s, const ModularPoint& m) {
  cplx h = 0;
  for (int j = 0; j < s.N; ++j) h += 0.5 * s.v[j] * s.v[j];
  for (int j = 0; j < s.N; ++j)
    for (int k = 0; k < j; ++k) h -= s.p(j, k) * s.p(k, j) * E2(s.u[j] - s.u[k], m.tau);
  return h;
}

}  // namespace ellwb
