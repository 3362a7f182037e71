#include "ellwb/flows.hpp"

#include <algorithm>
#include <cmath>

namespace ellwb {

const char* flow_name(FlowKind k) {
  switch (k) {
    case FlowKind::PVI_RATIONAL: return "PVI";
    case FlowKind::EPVI: return "EPVI";
    case FlowKind::CI: return "CI";
    case FlowKind::CM_SPIN: return "CM";
    case FlowKind::NACM: return "NACM";
    case FlowKind::ET: return "ET";
    case FlowKind::NAET: return "NAET";
    case FlowKind::ZVG: return "ZVG";
    case FlowKind::NAZVG: return "NAZVG";
  }
  return "?";
}

bool is_tau_flow(FlowKind k) {
  return k == FlowKind::EPVI || k == FlowKind::NACM || k == FlowKind::NAET || k == FlowKind::NAZVG;
}

std::array<cplx, 4> pvi_from_epvi(const std::array<cplx, 4>& nu, cplx kappa, PviReading reading) {
  std::array<cplx, 4> a{};
  for (int j = 0; j < 4; ++j) a[j] = reading == PviReading::Squared ? nu[j] * nu[j] / (2.0 * kappa * kappa) : nu[j];
  return {a[0], -a[1], a[2], 0.5 - a[3]};
}

std::array<cplx, 3> zvg_j(cplx tau, cplx shift) {
  std::array<cplx, 3> J{};
  for (int a = 1; a <= 3; ++a) J[a - 1] = E2(sigma_half_period(a, tau), tau) + shift;
  return J;
}

std::array<cplx, 3> cross3(const std::array<cplx, 3>& a, const std::array<cplx, 3>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

std::array<cplx, 3> zvg_velocity(const std::array<cplx, 3>& S, const std::array<cplx, 3>& J,
                                 const std::array<cplx, 3>& np) {
  std::array<cplx, 3> js{}, g{};
  for (int a = 0; a < 3; ++a) g[a] = J[a] * S[a] - np[a];
  const auto c = cross3(S, g);
  for (int a = 0; a < 3; ++a) js[a] = cplx(0, -2) * c[a];
  return js;
}

std::vector<cplx> top_velocity(const std::vector<cplx>& S, int N, cplx tau) {
  const auto idx = sl_basis_indices(N);
  Mat X = Mat::Zero(N, N), Y = Mat::Zero(N, N);
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const Mat t = t_matrix(idx[a]);
    Y += S[a] * t;
    X += E2(lattice_point(idx[a], tau), tau) * S[a] * t;
  }
  return t_coefficients(X * Y - Y * X, N);
}

cplx ci_force(cplx u, const std::array<cplx, 4>& nu, cplx tau) {
  cplx f = 0;
  for (int a = 0; a < 4; ++a)
    if (nu[a] != cplx(0.0)) f += 0.5 * nu[a] * nu[a] * E2_prime(u - half_period(a, tau), tau);
  return f;
}

namespace {

std::vector<cplx> cm_velocity(const std::vector<cplx>& s, int N, cplx tau) {
  const CMState st = CMState::unpack(N, s);
  std::vector<cplx> d(s.size(), 0.0);
  Mat Jp = Mat::Zero(N, N);
  for (int j = 0; j < N; ++j) {
    d[j] = st.v[j];
    for (int k = 0; k < N; ++k)
      if (j != k) Jp(j, k) = E2(st.u[j] - st.u[k], tau) * st.p(j, k);
  }
  for (int n = 0; n < N; ++n) {
    cplx acc = 0;
    for (int j = 0; j < N; ++j)
      if (j != n) acc -= st.p(j, n) * st.p(n, j) * E2_prime(st.u[j] - st.u[n], tau);
    d[N + n] = acc;
  }
  const Mat pd = Jp * st.p - st.p * Jp;
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k) d[2 * N + j * N + k] = pd(j, k);
  return d;
}

cplx pvi_rhs(cplx X, cplx Xd, cplx t, const std::array<cplx, 4>& p) {
  return 0.5 * (1.0 / X + 1.0 / (X - 1.0) + 1.0 / (X - t)) * Xd * Xd -
         (1.0 / t + 1.0 / (t - 1.0) + 1.0 / (X - t)) * Xd +
         X * (X - 1.0) * (X - t) / (t * t * (t - 1.0) * (t - 1.0)) *
             (p[0] + p[1] * t / (X * X) + p[2] * (t - 1.0) / ((X - 1.0) * (X - 1.0)) +
              p[3] * t * (t - 1.0) / ((X - t) * (X - t)));
}

std::array<cplx, 3> as3(const std::vector<cplx>& s) { return {s[0], s[1], s[2]}; }

void scale(std::vector<cplx>& v, cplx c) {
  for (auto& x : v) x *= c;
}

}  // namespace

std::vector<cplx> flow_rhs(const FlowSpec& spec, cplx time, const std::vector<cplx>& y) {
  const auto& p = spec.params;
  const cplx c = 1.0 / (two_pi_i * p.kappa);
  switch (spec.kind) {
    case FlowKind::PVI_RATIONAL: return {y[1], pvi_rhs(y[0], y[1], time, p.pvi)};
    case FlowKind::CI: return {y[1], ci_force(y[0], p.nu, p.tau)};
    case FlowKind::EPVI: return {c * y[1], c * ci_force(y[0], p.nu, time)};
    case FlowKind::CM_SPIN: return cm_velocity(y, p.N, p.tau);
    case FlowKind::NACM: {
      auto d = cm_velocity(y, p.N, time);
      scale(d, c);
      return d;
    }
    case FlowKind::ET: return top_velocity(y, p.N, p.tau);
    case FlowKind::NAET: {
      auto d = top_velocity(y, p.N, time);
      scale(d, c);
      return d;
    }
    case FlowKind::ZVG: {
      const auto v = zvg_velocity(as3(y), zvg_j(p.tau, p.j_shift), nu_prime_from_tilde(p.nu_tilde, p.tau));
      return {v[0], v[1], v[2]};
    }
    case FlowKind::NAZVG: {
      const auto v = zvg_velocity(as3(y), zvg_j(time, p.j_shift), nu_prime_from_tilde(p.nu_tilde, time));
      return {c * v[0], c * v[1], c * v[2]};
    }
  }
  throw std::invalid_argument("flow_rhs: unknown flow");
}

StateRhs lax_rhs(const FlowSpec& spec) {
  return [spec](const std::vector<cplx>& state, cplx tau) {
    FlowSpec s = spec;
    if (!is_tau_flow(spec.kind)) s.params.tau = tau;
    return flow_rhs(s, is_tau_flow(spec.kind) ? tau : cplx(0.0), state);
  };
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

using V = std::vector<cplx>;

V comb(const V& y, double h, std::initializer_list<std::pair<double, const V*>> terms) {
  V r = y;
  for (const auto& [a, k] : terms)
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += h * a * (*k)[i];
  return r;
}

}  // namespace

Trajectory integrate_path(const PathRhs& f, V y, double s_end, const IntegratorOptions& opt,
                          const std::function<cplx(double)>& time_of) {
  if (!(opt.rtol > 0) || !(opt.atol > 0)) throw std::invalid_argument("integrate: tolerances must be positive");
  if (opt.fixed_step && !(opt.h0 > 0)) throw std::invalid_argument("integrate: fixed_step needs h0 > 0");
  Trajectory tr;
  auto tm = [&](double s) { return time_of ? time_of(s) : cplx(s); };
  tr.samples.push_back({0.0, tm(0.0), y, 0.0, 0.0});
  if (s_end <= 0) return tr;
  double s = 0;
  double h = opt.h0 > 0 ? opt.h0 : std::min(s_end, 1e-2 * std::max(1.0, s_end));
  V k1 = f(s, y);
  long steps = 0;
  while (s < s_end) {
    if (++steps > opt.max_steps) throw SingularityError("integrate: step budget exhausted", tr);
    if (s + h > s_end) h = s_end - s;
    double err = 0;
    V y5, k7;
    bool ok = true;
    try {
      const V k2 = f(s + c2 * h, comb(y, h, {{a21, &k1}}));
      const V k3 = f(s + c3 * h, comb(y, h, {{a31, &k1}, {a32, &k2}}));
      const V k4 = f(s + c4 * h, comb(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
      const V k5 = f(s + c5 * h, comb(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
      const V k6 = f(s + h, comb(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
      y5 = comb(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
      k7 = f(s + h, y5);
      for (std::size_t i = 0; i < y.size(); ++i) {
        const cplx ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
        err = std::max(err, std::abs(ei) / sc);
      }
      for (const cplx& x : y5) ok = ok && std::isfinite(x.real()) && std::isfinite(x.imag());
      ok = ok && std::isfinite(err);
    } catch (const PoleError&) {
      ok = false;
    }
    if (!ok && opt.fixed_step)
      throw SingularityError("integrate: non-finite state at fixed step near s = " + std::to_string(s), tr);
    if (ok && (err <= 1.0 || opt.fixed_step)) {
      s = (s_end - (s + h) < 1e-15 * s_end) ? s_end : s + h;
      y = std::move(y5);
      k1 = std::move(k7);
      tr.samples.push_back({s, tm(s), y, h, err});
      const double fac = err == 0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (!opt.fixed_step) h *= fac;
    } else {
      ++tr.rejected;
      h *= ok ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9) : 0.25;
    }
    if (h < opt.h_min && s < s_end)
      throw SingularityError("integrate: step size underflow near s = " + std::to_string(s) +
                                 " (movable singularity?)",
                             tr);
  }
  return tr;
}

Trajectory integrate(const FlowSpec& spec, V y0, const IntegratorOptions& opt) {
  if (is_tau_flow(spec.kind)) {
    const double i0 = spec.t0.imag(), i1 = (spec.t0 + spec.s_end * spec.direction).imag();
    if (std::min(i0, i1) < spec.im_floor)
      throw DomainError("integrate: tau path leaves the region Im tau >= " + std::to_string(spec.im_floor));
  } else if (spec.kind != FlowKind::PVI_RATIONAL) {
    detail::require_upper_half_plane(spec.params.tau);
  }
  if ((is_tau_flow(spec.kind)) && spec.params.kappa == cplx(0.0))
    throw std::invalid_argument("integrate: isomonodromic flow needs kappa != 0");
  auto time_of = [&](double s) { return spec.t0 + s * spec.direction; };
  PathRhs f = [&](double s, const V& y) {
    V d = flow_rhs(spec, time_of(s), y);
    scale(d, spec.direction);
    return d;
  };
  return integrate_path(f, std::move(y0), spec.s_end, opt, time_of);
}

// ---------------------------------------------------------------------------

const QuantityDrift& ConservedReport::get(const std::string& name) const {
  for (const auto& q : quantities)
    if (q.name == name) return q;
  throw std::invalid_argument("ConservedReport: no quantity " + name);
}

ConservedReport conserved_report(const FlowSpec& spec, const Trajectory& traj, const std::vector<Quantity>& qs) {
  if (traj.samples.empty()) throw std::invalid_argument("conserved_report: empty trajectory");
  ConservedReport r;
  r.conservation_expected = !is_tau_flow(spec.kind) && spec.kind != FlowKind::PVI_RATIONAL;
  for (const auto& q : qs) {
    QuantityDrift d{q.name, q.eval(traj.samples[0].time, traj.samples[0].state), 0.0};
    for (const auto& smp : traj.samples) d.max_drift = std::max(d.max_drift, std::abs(q.eval(smp.time, smp.state) - d.initial));
    r.quantities.push_back(d);
  }
  return r;
}

std::vector<Quantity> standard_quantities(const FlowSpec& spec, cplx z0) {
  std::vector<Quantity> q;
  const auto p = spec.params;
  const bool tf = is_tau_flow(spec.kind);
  auto tau_of = [p, tf](cplx time) { return tf ? time : p.tau; };
  auto trl2 = [](const Mat& l) { return (l * l).trace(); };
  switch (spec.kind) {
    case FlowKind::CI:
    case FlowKind::EPVI:
      q.push_back({"H", [p, tau_of](cplx t, const V& y) {
                     return ci_hamiltonian({y[0], y[1], ci_nu_tilde(p.nu)}, ModularPoint(tau_of(t)));
                   }});
      q.push_back({"trL2", [=](cplx t, const V& y) {
                     return trl2(build_ci_lax({y[0], y[1], ci_nu_tilde(p.nu)}, ModularPoint(tau_of(t))).L(z0));
                   }});
      break;
    case FlowKind::ZVG:
    case FlowKind::NAZVG:
      q.push_back({"casimir", [](cplx, const V& y) { return y[0] * y[0] + y[1] * y[1] + y[2] * y[2]; }});
      q.push_back({"H", [p, tau_of](cplx t, const V& y) {
                     const cplx tau = tau_of(t);
                     return zvg_hamiltonian(GyroState::make({y[0], y[1], y[2]}, p.nu_tilde, tau), ModularPoint(tau));
                   }});
      q.push_back({"trL2", [=](cplx t, const V& y) {
                     const cplx tau = tau_of(t);
                     return trl2(build_zvg_lax(GyroState::make({y[0], y[1], y[2]}, p.nu_tilde, tau), ModularPoint(tau)).L(z0));
                   }});
      break;
    case FlowKind::ET:
    case FlowKind::NAET:
      q.push_back({"trL2", [=](cplx t, const V& y) {
                     return trl2(build_top_lax({p.N, y}, ModularPoint(tau_of(t))).L(z0));
                   }});
      q.push_back({"casimir", [p](cplx, const V& y) {
                     const Mat s = from_t_coefficients(y, p.N);
                     return (s * s).trace();
                   }});
      break;
    case FlowKind::CM_SPIN:
    case FlowKind::NACM:
      q.push_back({"H", [p, tau_of](cplx t, const V& y) {
                     return cm_hamiltonian(CMState::unpack(p.N, y), ModularPoint(tau_of(t)));
                   }});
      q.push_back({"trL2", [=](cplx t, const V& y) {
                     return trl2(build_cm_lax(CMState::unpack(p.N, y), ModularPoint(tau_of(t))).L(z0));
                   }});
      break;
    case FlowKind::PVI_RATIONAL: break;
  }
  return q;
}

// ---------------------------------------------------------------------------

double pvi_residual(cplx X, cplx Xd, cplx Xdd, cplx t, const std::array<cplx, 4>& pvi) {
  const cplx r = pvi_rhs(X, Xd, t, pvi);
  return std::abs(Xdd - r) / std::max({std::abs(Xdd), std::abs(r), 1e-300});
}

namespace {

template <class T>
std::pair<T, T> xt(const T& u, const T& tau) {
  const T e1 = E2(half_period(1, tau), tau), e2 = E2(half_period(2, tau), tau), e3 = E2(half_period(3, tau), tau);
  if (std::abs(value_of(e2) - value_of(e1)) < 1e-12) throw DomainError("pvi: branch degeneracy e2 = e1");
  return {(E2(u, tau) - e1) / (e2 - e1), (e3 - e1) / (e2 - e1)};
}

}  // namespace

std::pair<cplx, cplx> pvi_coordinates(cplx u, cplx tau) { return xt(u, tau); }

cplx tau_from_t(cplx t, cplx tau) {
  using J = Jet<1, 1>;
  for (int it = 0; it < 50; ++it) {
    const J T = xt(J(0.5), J::variable(0, tau)).second;
    const cplx step = (T.value() - t) / T.d(0);
    tau -= step;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(tau))) break;
  }
  return tau;
}

PviReport pvi_crosscheck(const FlowSpec& spec, const Trajectory& traj, PviReading reading) {
  if (spec.kind != FlowKind::EPVI) throw std::invalid_argument("pvi_crosscheck: needs an EPVI trajectory");
  PviReport rep;
  rep.reading = reading;
  rep.pvi = pvi_from_epvi(spec.params.nu, spec.params.kappa, reading);
  const cplx c = 1.0 / (two_pi_i * spec.params.kappa);
  using J = Jet<1, 2>;
  for (const auto& smp : traj.samples) {
    const cplx tau = smp.time, u = smp.state[0], v = smp.state[1];
    const cplx du = c * v;
    const cplx ddu = c * c * ci_force(u, spec.params.nu, tau);
    J U(u);
    U.c[1] = du;
    U.c[2] = 0.5 * ddu;
    const auto [X, T] = xt(U, J::variable(0, tau));
    const cplx xt1 = X.deriv({1}), xt2 = X.deriv({2}), tt1 = T.deriv({1}), tt2 = T.deriv({2});
    const cplx Xd = xt1 / tt1;
    const cplx Xdd = (xt2 - Xd * tt2) / (tt1 * tt1);
    PviPoint pt{tau, u, du, X.value(), T.value(), pvi_residual(X.value(), Xd, Xdd, T.value(), rep.pvi)};
    rep.max_residual = std::max(rep.max_residual, pt.residual);
    rep.max_inversion_error = std::max(rep.max_inversion_error, std::abs(tau_from_t(pt.t, tau + 0.01) - tau));
    rep.points.push_back(pt);
  }
  return rep;
}

}  // namespace ellwb
