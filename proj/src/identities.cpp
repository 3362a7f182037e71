#include "ellwb/identities.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace ellwb {

cplx IdentityContext::phi(cplx u, cplx z) {
  guard(u);
  guard(z);
  guard(u + z);
  return ellwb::phi(u, z, tau_);
}

cplx IdentityContext::f(cplx u, cplx z) {
  guard(u);
  guard(z);
  guard(u + z);
  return f_kernel(u, z, tau_);
}

cplx IdentityContext::E1(cplx x) {
  guard(x);
  return ellwb::E1(x, tau_);
}

cplx IdentityContext::E2(cplx x) {
  guard(x);
  return ellwb::E2(x, tau_);
}

cplx IdentityContext::zeta(cplx x) {
  guard(x);
  return ellwb::zeta(x, tau_);
}

cplx IdentityContext::theta_num(cplx x) { return theta(x, tau_); }

cplx IdentityContext::theta_den(cplx x) {
  guard(x);
  return theta(x, tau_);
}

cplx IdentityContext::theta_prime0() { return ellwb::theta_prime0(tau_); }

cplx IdentityContext::theta_k(int k, cplx x, cplx t) {
  switch (k) {
    case 1: return theta1(x, t);
    case 2: return theta2(x, t);
    case 3: return theta3(x, t);
    case 4: return theta4(x, t);
    default: throw std::invalid_argument("theta_k: k must be 1..4");
  }
}

cplx IdentityContext::vp(int alpha, cplx z) {
  const cplx w = half_period(alpha);
  guard(z);
  guard(z + w);
  return varphi_sigma(alpha, z, tau_);
}

cplx IdentityContext::vpe(int alpha, cplx eta, cplx z) {
  const cplx w = alpha == 0 ? cplx(0.0) : half_period(alpha);
  guard(z);
  guard(w + eta);
  guard(w + eta + z);
  return phi_eta_sigma(alpha, eta, z, tau_);
}

double relative_residual(const Equation& eq) {
  cplx s = 0.0;
  double mx = 0.0;
  for (const cplx& t : eq) {
    s += t;
    mx = std::max(mx, std::abs(t));
  }
  if (mx == 0.0) return 0.0;
  return std::abs(s) / mx;
}

namespace {

using P = std::vector<cplx>;
using Eqs = std::vector<Equation>;
using Ctx = IdentityContext;

constexpr std::array<std::array<int, 3>, 3> kCyclic{{{1, 2, 3}, {2, 3, 1}, {3, 1, 2}}};

// Appends coefficient * (each summand of terms) to eq.
void append_scaled(Equation& eq, const Equation& terms, cplx coefficient) {
  for (const cplx& t : terms) eq.push_back(coefficient * t);
}

Eqs theta_double_modulus(Ctx& c, const P& p, int line) {
  const cplx x = p[0], y = p[1], t = c.tau(), t2 = 2.0 * c.tau();
  auto th = [&](int k, cplx a, cplx tt) { return c.theta_k(k, a, tt); };
  switch (line) {
    case 1: return {{th(4, x, t) * th(3, y, t), th(4, y, t) * th(3, x, t), -2.0 * th(4, x + y, t2) * th(4, x - y, t2)}};
    case 2: return {{th(4, x, t) * th(3, y, t), -th(4, y, t) * th(3, x, t), -2.0 * th(1, x + y, t2) * th(1, x - y, t2)}};
    case 3: return {{th(3, x, t) * th(3, y, t), th(4, y, t) * th(4, x, t), -2.0 * th(3, x + y, t2) * th(3, x - y, t2)}};
    default: return {{th(3, x, t) * th(3, y, t), -th(4, y, t) * th(4, x, t), -2.0 * th(2, x + y, t2) * th(2, x - y, t2)}};
  }
}

Eqs theta_half_argument(Ctx& c, const P& p, int line) {
  const cplx x = p[0], y = p[1], t = c.tau(), t2 = 2.0 * c.tau();
  const cplx a = 0.5 * (x + y), b = 0.5 * (x - y);
  auto th = [&](int k, cplx arg, cplx tt) { return c.theta_k(k, arg, tt); };
  switch (line) {
    case 1: return {{2.0 * th(1, x, t2) * th(4, y, t2), -th(1, a, t) * th(2, b, t), -th(2, a, t) * th(1, b, t)}};
    case 2: return {{2.0 * th(3, x, t2) * th(2, y, t2), -th(1, a, t) * th(1, b, t), -th(2, a, t) * th(2, b, t)}};
    case 3: return {{2.0 * th(3, x, t2) * th(3, y, t2), -th(3, a, t) * th(3, b, t), -th(4, a, t) * th(4, b, t)}};
    default: return {{2.0 * th(2, x, t2) * th(2, y, t2), -th(3, a, t) * th(3, b, t), th(4, a, t) * th(4, b, t)}};
  }
}

// Pieces of the 1 (x) sigma_gamma channel of the reflection equation.
struct ChannelPieces {
  // coefficient of [S_gamma, S_0] after cancelling 2 phi(z, hbar)
  Equation A;
  // coefficient of [S_alpha, S_beta]_+ (divided by i)
  Equation B;
  // coefficients of 2i nu~_alpha S_beta and 2i nu~_beta S_alpha
  Equation C, D;
};

ChannelPieces channel_pieces(Ctx& c, cplx z, cplx w, cplx h, int al, int be, int ga) {
  const cplx Wa = c.half_period(al), Wb = c.half_period(be);
  auto V = [&](int a, cplx x) { return c.vpe(a, h, x); };
  auto V0 = [&](int a, cplx x) { return c.vp(a, x); };
  auto Ph = [&](cplx x) { return c.phi(h, x); };
  const cplx sa = V0(al, z - w) + V0(al, z + w);
  const cplx sb = V0(be, z - w) + V0(be, z + w);
  ChannelPieces r;
  r.A = {V(ga, z) * Ph(w) * (V0(ga, z - w) + V0(ga, z + w)), -V(ga, w) * Ph(w) * Ph(z - w),
         -V(ga, w) * Ph(-w) * Ph(z + w)};
  r.B = {-V(al, z) * V(be, w) * sa, V(be, z) * V(al, w) * sb};
  r.C = {V(al, z - Wa) * V(be, w) * sa, -V(be, z) * V(al, w - Wa) * sb};
  r.D = {V(al, z) * V(be, w - Wb) * sa, -V(be, z - Wb) * V(al, w) * sb};
  return r;
}

cplx K_const(Ctx& c, int a, cplx h) {
  const cplx w = c.half_period(a);
  return c.E1(h + w) - c.E1(h) - c.E1(w);
}

cplx rho_const(Ctx& c, int a, cplx h) {
  const cplx w = c.half_period(a);
  return -e(-w * c.half_period_dtau(a)) * c.phi(w + h, -w);
}

std::vector<IdentityCase> build_registry() {
  std::vector<IdentityCase> R;

  R.push_back({"fay_trisection", "Fay three-section formula", 4, [](Ctx& c, const P& p) -> Eqs {
                 const cplx u1 = p[0], u2 = p[1], z1 = p[2], z2 = p[3];
                 return {{c.phi(u1, z1) * c.phi(u2, z2), -c.phi(u1 + u2, z1) * c.phi(u2, z2 - z1),
                          -c.phi(u1 + u2, z2) * c.phi(u1, z1 - z2)}};
               }});

  R.push_back({"calogero_functional", "Calogero functional equation", 3, [](Ctx& c, const P& p) -> Eqs {
                 const cplx u = p[0], v = p[1], z = p[2];
                 const cplx puv = c.phi(u + v, z);
                 return {{c.phi(u, z) * c.f(v, z), -c.phi(v, z) * c.f(u, z), -c.E2(u) * puv,
                          c.E2(v) * puv}};
               }});

  R.push_back({"three_phi_zeta", "three-phi relation with the zeta combination", 5, [](Ctx& c, const P& p) -> Eqs {
                 const cplx u1 = p[0], u2 = p[1], v = p[2], z = p[3], w = p[4];
                 const cplx pre = c.phi(u1, z) * c.phi(u2, w);
                 return {{c.phi(v, z - w) * c.phi(u1 - v, z) * c.phi(u2 + v, w),
                          -c.phi(u1 - u2 - v, z - w) * c.phi(u2 + v, z) * c.phi(u1 - v, w),
                          -pre * c.zeta(v), pre * c.zeta(u1 - u2 - v), -pre * c.zeta(u1 - v),
                          pre * c.zeta(u2 + v)}};
               }});

  R.push_back({"zeta_theta_quotient", "zeta combination as a theta quotient", 3, [](Ctx& c, const P& p) -> Eqs {
                 const cplx u1 = p[0], u2 = p[1], v = p[2];
                 const cplx q = c.theta_prime0() * c.theta_num(u1) * c.theta_num(u2) *
                                c.theta_num(u2 - u1 + 2.0 * v) /
                                (c.theta_den(u1 - v) * c.theta_den(u2 + v) * c.theta_den(u2 - u1 + v) *
                                 c.theta_den(v));
                 return {{c.zeta(v), -c.zeta(u1 - u2 - v), c.zeta(u1 - v), -c.zeta(u2 + v), -q}};
               }});

  for (int line = 1; line <= 4; ++line) {
    R.push_back({"theta_double_modulus." + std::to_string(line), "theta products at doubled modulus", 2,
                 [line](Ctx& c, const P& p) { return theta_double_modulus(c, p, line); }});
  }
  for (int line = 1; line <= 4; ++line) {
    R.push_back({"theta_half_argument." + std::to_string(line), "theta products at halved arguments", 2,
                 [line](Ctx& c, const P& p) { return theta_half_argument(c, p, line); }});
  }

  R.push_back({"varphi_half_period_reflection", "reflection of varphi_alpha through half-periods", 1, [](Ctx& c, const P& p) -> Eqs {
                 const cplx z = p[0];
                 Eqs out;
                 for (int a = 1; a <= 3; ++a)
                   for (int b = 0; b <= 3; ++b) {
                     const cplx wb = b == 0 ? cplx(0.0) : c.half_period(b);
                     const cplx lhs = c.vp(a, -z - wb);
                     if (b == a) out.push_back({lhs, c.vp(a, z - c.half_period(a))});
                     else if (b == 0) out.push_back({lhs, c.vp(a, z)});
                     else out.push_back({lhs, -c.vp(a, z - wb)});
                   }
                 return out;
               }});

  R.push_back({"varphi_half_period_product", "product of varphi_alpha and its half-period shift", 1, [](Ctx& c, const P& p) -> Eqs {
                 const cplx z = p[0];
                 Eqs out;
                 for (int a = 1; a <= 3; ++a) {
                   const cplx w = c.half_period(a);
                   const cplx r = c.theta_prime0() / c.theta_den(w);
                   out.push_back({c.vp(a, z) * c.vp(a, z - w), e(-w * c.half_period_dtau(a)) * r * r});
                 }
                 return out;
               }});

  R.push_back({"heat", "heat equation for phi", 2, [](Ctx& c, const P& p) -> Eqs {
                 const cplx u = p[0], w = p[1];
                 c.phi(u, w);
                 using J = Jet<3, 2>;
                 const J r = phi(J::variable(0, u), J::variable(1, w), J::variable(2, c.tau()));
                 return {{r.deriv({0, 0, 1}), -r.deriv({1, 1, 0}) / two_pi_i}};
               }});

  R.push_back({"phi_eta_collapse", "phi^eta sum collapsing to undeformed varphi", 3, [](Ctx& c, const P& p) -> Eqs {
                 const cplx z = p[0], w = p[1], eta = p[2];
                 Eqs out;
                 for (int a = 1; a <= 3; ++a) {
                   const cplx pz = c.phi(z, eta);
                   out.push_back({c.phi(w, eta) * c.vpe(a, eta, z - w), c.phi(-w, eta) * c.vpe(a, eta, z + w),
                                  -pz * c.vp(a, z - w), -pz * c.vp(a, z + w)});
                 }
                 return out;
               }});

  auto quad = [](double sgn_b, double sgn_c) {
    return [sgn_b, sgn_c](Ctx& c, const P& p) -> Eqs {
      const cplx z = p[0], w = p[1], eta = p[2];
      Eqs out;
      for (auto [al, be, ga] : kCyclic) {
        auto A = [&](int a) { return c.vpe(a, eta, z - w) * c.vpe(a, eta, z + w); };
        Equation eq{c.phi(eta, z - w) * c.phi(eta, z + w), A(al), sgn_b * A(be), sgn_c * A(ga)};
        if (sgn_b > 0) {
          eq.push_back(-2.0 * c.phi(2.0 * eta, z - w) * c.phi(w, 2.0 * eta));
          eq.push_back(-2.0 * c.phi(2.0 * eta, z + w) * c.phi(-w, 2.0 * eta));
        } else {
          eq.push_back(-2.0 * c.phi(2.0 * eta, z - w) * c.vpe(al, w, 2.0 * eta));
          eq.push_back(-2.0 * c.phi(2.0 * eta, z + w) * c.vpe(al, -w, 2.0 * eta));
        }
        out.push_back(eq);
      }
      return out;
    };
  };
  R.push_back({"eta_square_sum", "sum of deformed squares at doubled eta", 3, quad(1, 1)});
  R.push_back({"eta_square_signed", "signed deformed squares at doubled eta", 3, quad(-1, -1)});

  R.push_back({"eta_mixed_antisymmetric", "mixed deformed products, antisymmetric", 3, [](Ctx& c, const P& p) -> Eqs {
                 const cplx z = p[0], w = p[1], eta = p[2];
                 Eqs out;
                 for (auto [al, be, ga] : kCyclic) {
                   auto V = [&](int a, cplx x) { return c.vpe(a, eta, x); };
                   out.push_back({V(be, z - w) * c.phi(eta, z + w), -c.phi(eta, z - w) * V(be, z + w),
                                  -V(al, z - w) * V(ga, z + w), V(ga, z - w) * V(al, z + w),
                                  -2.0 * c.vpe(be, 2.0 * eta, z - w) * c.vpe(al, w, 2.0 * eta),
                                  2.0 * c.vpe(be, 2.0 * eta, z + w) * c.vpe(al, -w, 2.0 * eta)});
                 }
                 return out;
               }});

  R.push_back({"eta_mixed_symmetric", "mixed deformed products, symmetric", 3, [](Ctx& c, const P& p) -> Eqs {
                 const cplx z = p[0], w = p[1], eta = p[2];
                 Eqs out;
                 for (auto [al, be, ga] : kCyclic) {
                   auto V = [&](int a, cplx x) { return c.vpe(a, eta, x); };
                   out.push_back({V(be, z - w) * V(ga, z + w), V(ga, z - w) * V(be, z + w),
                                  -V(al, z - w) * c.phi(eta, z + w), -c.phi(eta, z - w) * V(al, z + w),
                                  2.0 * c.vpe(al, 2.0 * eta, z - w) * c.vpe(al, w, 2.0 * eta),
                                  2.0 * c.vpe(al, 2.0 * eta, z + w) * c.vpe(al, -w, 2.0 * eta)});
                 }
                 return out;
               }});

  R.push_back({"eta_triple_sum", "triple deformed products, sum argument", 3, [](Ctx& c, const P& p) -> Eqs {
                 const cplx z = p[0], w = p[1], eta = p[2];
                 Eqs out;
                 for (auto [al, be, ga] : kCyclic) {
                   auto V = [&](int a, cplx x) { return c.vpe(a, eta, x); };
                   out.push_back({V(be, z + w) * V(ga, z) * c.phi(eta, w), V(al, z + w) * c.phi(eta, z) * V(ga, w),
                                  -c.phi(eta, z + w) * V(al, z) * V(be, w), -V(ga, z + w) * V(be, z) * V(al, w)});
                 }
                 return out;
               }});

  R.push_back({"eta_triple_difference", "triple deformed products, difference argument", 3, [](Ctx& c, const P& p) -> Eqs {
                 const cplx z = p[0], w = p[1], eta = p[2];
                 Eqs out;
                 for (auto [al, be, ga] : kCyclic) {
                   auto V = [&](int a, cplx x) { return c.vpe(a, eta, x); };
                   out.push_back({V(be, z - w) * V(ga, z) * c.phi(eta, w), -V(al, z - w) * c.phi(eta, z) * V(ga, w),
                                  c.phi(eta, z - w) * V(al, z) * V(be, w), -V(ga, z - w) * V(be, z) * V(al, w)});
                 }
                 return out;
               }});

  R.push_back({"e1_weighted_triple", "E1-weighted triple products", 3, [](Ctx& c, const P& p) -> Eqs {
                 const cplx z = p[0], w = p[1], eta = p[2];
                 Eqs out;
                 for (auto [al, be, ga] : kCyclic) {
                   auto V = [&](int a, cplx x) { return c.vpe(a, eta, x); };
                   auto Es = [&](int a) {
                     const cplx h = c.half_period(a);
                     return c.E1(eta + h) + c.E1(eta - h);
                   };
                   const cplx k1 = Es(be) - Es(al);
                   const cplx k2 = Es(ga) - 2.0 * c.E1(eta);
                   out.push_back({k1 * V(ga, z + w) * V(ga, z) * c.phi(eta, w),
                                  -k1 * c.phi(eta, z + w) * c.phi(eta, z) * V(ga, w),
                                  k2 * V(al, z + w) * V(al, z) * V(be, w), -k2 * V(be, z + w) * V(be, z) * V(al, w)});
                 }
                 return out;
               }});

  R.push_back({"shifted_triple_eta_reflection", "half-period shifted triple products, eta reflection", 3, [](Ctx& c, const P& p) -> Eqs {
                 const cplx z = p[0], w = p[1], eta = p[2];
                 Eqs out;
                 for (auto [al, be, ga] : kCyclic) {
                   (void)ga;
                   auto V = [&](int a, cplx x) { return c.vpe(a, eta, x); };
                   const cplx Wa = c.half_period(al), Wb = c.half_period(be);
                   const cplx m1 = V(al, z - Wa) * V(be, w - Wb), m2 = V(be, z - Wb) * V(al, w - Wa);
                   const cplx pw = c.phi(eta, w), mw = c.phi(-eta, w);
                   out.push_back({-pw * m1 * V(al, z - w), pw * m2 * V(be, z - w), mw * m1 * V(al, z + w),
                                  -mw * m2 * V(be, z + w)});
                 }
                 return out;
               }});

  R.push_back({"shifted_triple_w_reflection", "half-period shifted triple products, w reflection", 3, [](Ctx& c, const P& p) -> Eqs {
                 const cplx z = p[0], w = p[1], eta = p[2];
                 Eqs out;
                 for (auto [al, be, ga] : kCyclic) {
                   auto V = [&](int a, cplx x) { return c.vpe(a, eta, x); };
                   const cplx Wa = c.half_period(al), Wg = c.half_period(ga);
                   const cplx l = c.phi(eta, w + Wa), r = c.phi(eta, -w + Wa);
                   const cplx g1 = V(ga, z - Wg) * c.phi(eta, w), g2 = c.phi(eta, z) * V(ga, w - Wg);
                   out.push_back({l * g1 * V(be, z - w), -l * g2 * V(al, z - w), -r * g1 * V(be, z + w),
                                  -r * g2 * V(al, z + w)});
                 }
                 return out;
               }});

  R.push_back({"gyro_channel_nunu", "the [nu~_alpha, nu~_beta]_+ coefficient of the 1 (x) sigma_gamma channel vanishes",
               3, [](Ctx& c, const P& p) -> Eqs {
                 const cplx z = p[0], w = p[1], h = p[2];
                 Eqs out;
                 for (auto [al, be, ga] : kCyclic) {
                   (void)ga;
                   auto V = [&](int a, cplx x) { return c.vpe(a, h, x); };
                   const cplx Wa = c.half_period(al), Wb = c.half_period(be);
                   const cplx m1 = V(al, z - Wa) * V(be, w - Wb), m2 = V(be, z - Wb) * V(al, w - Wa);
                   const cplx pw = 2.0 * c.phi(w, h), mw = 2.0 * c.phi(-w, h);
                   out.push_back({-pw * m1 * V(al, z - w), pw * m2 * V(be, z - w), -mw * m1 * V(al, z + w),
                                  mw * m2 * V(be, z + w)});
                 }
                 return out;
               }});

  R.push_back({"gyro_channel_reduction", "1 (x) sigma_gamma channel coefficients reduce by 2 phi(z, hbar)", 3,
               [](Ctx& c, const P& p) -> Eqs {
                 const cplx z = p[0], w = p[1], h = p[2];
                 Eqs out;
                 for (auto [al, be, ga] : kCyclic) {
                   auto V = [&](int a, cplx x) { return c.vpe(a, h, x); };
                   auto Ph = [&](cplx x) { return c.phi(h, x); };
                   const cplx pw = c.phi(w, h), mw = c.phi(-w, h);
                   const cplx Wa = c.half_period(al), Wb = c.half_period(be);
                   const cplx two_pz = 2.0 * c.phi(z, h);
                   const ChannelPieces q = channel_pieces(c, z, w, h, al, be, ga);
                   // [S_gamma, S_0]
                   Equation e1{2.0 * V(ga, z) * Ph(w) * (pw * V(ga, z - w) + mw * V(ga, z + w)),
                               -2.0 * Ph(z) * V(ga, w) * (pw * Ph(z - w) + mw * Ph(z + w))};
                   append_scaled(e1, q.A, -two_pz);
                   out.push_back(e1);
                   auto sumx = [&](int a) { return V(a, z - w) * Ph(w) + V(a, z + w) * Ph(-w); };
                   // 4i nu~_alpha S_beta
                   Equation e2{4.0 * I * V(al, z - Wa) * V(be, w) * sumx(al), -4.0 * I * V(be, z) * V(al, w - Wa) * sumx(be)};
                   append_scaled(e2, q.C, -two_pz * 2.0 * I);
                   out.push_back(e2);
                   // 4i nu~_beta S_alpha
                   Equation e3{4.0 * I * V(al, z) * V(be, w - Wb) * sumx(al), -4.0 * I * V(be, z - Wb) * V(al, w) * sumx(be)};
                   append_scaled(e3, q.D, -two_pz * 2.0 * I);
                   out.push_back(e3);
                   // i [S_alpha, S_beta]_+
                   Equation e4{-2.0 * V(al, z) * V(be, w) * (pw * V(al, z - w) + mw * V(al, z + w)),
                               2.0 * V(be, z) * V(al, w) * (pw * V(be, z - w) + mw * V(be, z + w))};
                   append_scaled(e4, q.B, -two_pz);
                   out.push_back(e4);
                 }
                 return out;
               }});

  R.push_back({"gyro_channel_ss", "[S_alpha, S_beta]_+ coefficient match with the K_alpha constants", 3,
               [](Ctx& c, const P& p) -> Eqs {
                 const cplx z = p[0], w = p[1], h = p[2];
                 Eqs out;
                 for (auto [al, be, ga] : kCyclic) {
                   const ChannelPieces q = channel_pieces(c, z, w, h, al, be, ga);
                   const cplx k = (K_const(c, be, h) - K_const(c, al, h)) / K_const(c, ga, h);
                   Equation eq;
                   append_scaled(eq, q.A, k);
                   append_scaled(eq, q.B, -1.0);
                   out.push_back(eq);
                 }
                 return out;
               }});

  R.push_back({"gyro_channel_nus", "nu~ S coefficient match with the rho_alpha constants", 3,
               [](Ctx& c, const P& p) -> Eqs {
                 const cplx z = p[0], w = p[1], h = p[2];
                 Eqs out;
                 for (auto [al, be, ga] : kCyclic) {
                   const ChannelPieces q = channel_pieces(c, z, w, h, al, be, ga);
                   const cplx kg = K_const(c, ga, h);
                   Equation eb;
                   append_scaled(eb, q.A, rho_const(c, al, h) / kg);
                   append_scaled(eb, q.C, 1.0);
                   out.push_back(eb);
                   Equation ea;
                   append_scaled(ea, q.A, rho_const(c, be, h) / kg);
                   append_scaled(ea, q.D, -1.0);
                   out.push_back(ea);
                 }
                 return out;
               }});

  return R;
}

}  // namespace

const std::vector<IdentityCase>& identity_registry() {
  static const std::vector<IdentityCase> reg = build_registry();
  return reg;
}

const IdentityCase& find_identity(const std::string& id) {
  for (const auto& c : identity_registry())
    if (c.id == id) return c;
  throw std::invalid_argument("unknown identity case: " + id);
}

double residual(const IdentityCase& c, const std::vector<cplx>& params, cplx tau) {
  if (static_cast<int>(params.size()) != c.arity)
    throw std::invalid_argument("identity " + c.id + ": expected " + std::to_string(c.arity) + " parameters");
  IdentityContext ctx(tau);
  double r = 0;
  for (const auto& eq : c.body(ctx, params)) r = std::max(r, relative_residual(eq));
  return r;
}

double residual(const std::string& id, const std::vector<cplx>& params, cplx tau) {
  return residual(find_identity(id), params, tau);
}

IdentityCase corrupted(const IdentityCase& c) {
  IdentityCase out = c;
  out.id = c.id + ".corrupted";
  auto body = c.body;
  out.body = [body](IdentityContext& ctx, const std::vector<cplx>& p) {
    auto eqs = body(ctx, p);
    for (auto& eq : eqs)
      if (!eq.empty()) eq.back() = -eq.back();
    return eqs;
  };
  return out;
}

bool SuiteReport::all_pass() const {
  return std::all_of(cases.begin(), cases.end(), [](const CaseReport& c) { return c.pass; });
}

std::vector<cplx> sample_point(const IdentityCase& c, cplx tau, std::mt19937_64& rng, double margin) {
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<cplx> p(c.arity);
    for (auto& x : p) {
      const double a = U(rng), b = U(rng);
      x = a + b * tau;
    }
    IdentityContext ctx(tau);
    try {
      c.body(ctx, p);
    } catch (const PoleError&) {
      continue;
    }
    bool ok = true;
    for (const cplx& g : ctx.guarded())
      if (nearest_lattice_point(g, tau).distance < margin) {
        ok = false;
        break;
      }
    if (ok) return p;
  }
  throw std::runtime_error("identity " + c.id + ": could not draw a regular sample point");
}

SuiteReport run_suite(int samples_per_case, double tol, std::uint64_t seed, const std::vector<cplx>& taus,
                      const std::vector<IdentityCase>& cases) {
  if (samples_per_case < 1) throw std::invalid_argument("run_suite: samples_per_case must be >= 1");
  SuiteReport rep;
  for (std::size_t ti = 0; ti < taus.size(); ++ti) {
    for (std::size_t ci = 0; ci < cases.size(); ++ci) {
      const auto& c = cases[ci];
      std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * (ci + 1)) ^ (0xBF58476D1CE4E5B9ULL * (ti + 1)));
      CaseReport cr{c.id, taus[ti], 0.0, false, {}, samples_per_case};
      for (int s = 0; s < samples_per_case; ++s) {
        const auto p = sample_point(c, taus[ti], rng);
        const double r = residual(c, p, taus[ti]);
        if (r >= cr.max_residual) {
          cr.max_residual = r;
          cr.worst_point = p;
        }
      }
      cr.pass = cr.max_residual < tol;
      rep.cases.push_back(cr);
    }
  }
  return rep;
}

}  // namespace ellwb
