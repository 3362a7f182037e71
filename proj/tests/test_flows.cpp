#include <gtest/gtest.h>

#include "ellwb/flows.hpp"

using namespace ellwb;

namespace {

const cplx kTau(0.2, 1.0);
const std::array<cplx, 3> kNuTilde{cplx(0.25, -0.1), cplx(0.4, 0.3), cplx(-0.3, 0.2)};
const std::array<cplx, 4> kNu{cplx(0.3, 0.1), cplx(0.25, -0.2), cplx(-0.4, 0.15), cplx(0.35, 0.3)};
const std::vector<cplx> kS0{cplx(0.3, 0.2), cplx(-0.5, 0.1), cplx(0.7, -0.4)};

FlowSpec zvg_spec() {
  FlowSpec s;
  s.kind = FlowKind::ZVG;
  s.params.tau = kTau;
  s.params.nu_tilde = kNuTilde;
  return s;
}

FlowSpec epvi_spec() {
  FlowSpec s;
  s.kind = FlowKind::EPVI;
  s.params.nu = kNu;
  s.params.kappa = 1.0;
  s.t0 = cplx(0.15, 1.05);
  s.direction = cplx(0.1, 0.05);
  s.s_end = 1.0;
  return s;
}

IntegratorOptions tight() {
  IntegratorOptions o;
  o.rtol = 1e-12;
  o.atol = 1e-14;
  return o;
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST(Flows, ZvgAxisStateIsAFixedPoint) {
  FlowSpec s = zvg_spec();
  s.params.nu_tilde = {};
  const auto tr = integrate(s, {1.0, 0.0, 0.0});
  EXPECT_EQ(tr.back().s, 1.0);
  EXPECT_LT(max_diff(tr.back().state, {1.0, 0.0, 0.0}), 1e-15);
}

TEST(Flows, ZvgConservation) {
  const FlowSpec s = zvg_spec();
  const auto tr = integrate(s, kS0, tight());
  const auto rep = conserved_report(s, tr, standard_quantities(s, cplx(0.13, 0.21)));
  EXPECT_TRUE(rep.conservation_expected);
  EXPECT_LT(rep.get("casimir").max_drift, 1e-10);
  EXPECT_LT(rep.get("H").max_drift, 1e-8);
  EXPECT_LT(rep.get("trL2").max_drift, 1e-8);
}

TEST(Flows, JShiftDoesNotChangeTheGyrostatFlow) {
  FlowSpec a = zvg_spec(), b = zvg_spec();
  b.params.j_shift = cplx(0.7, -0.3);
  const auto ta = integrate(a, kS0, tight()), tb = integrate(b, kS0, tight());
  EXPECT_LT(max_diff(ta.back().state, tb.back().state), 1e-9);
}

TEST(Flows, CalogeroInozemtsevConservation) {
  FlowSpec s;
  s.kind = FlowKind::CI;
  s.params.tau = kTau;
  s.params.nu = kNu;
  const auto tr = integrate(s, {cplx(0.17, 0.23), cplx(0.4, -0.3)}, tight());
  const auto rep = conserved_report(s, tr, standard_quantities(s, cplx(0.13, 0.21)));
  EXPECT_LT(rep.get("H").max_drift, 1e-8);
  EXPECT_LT(rep.get("trL2").max_drift, 1e-8);
}

TEST(Flows, EllipticTopConservation) {
  FlowSpec s;
  s.kind = FlowKind::ET;
  s.params.tau = kTau;
  s.params.N = 3;
  std::vector<cplx> y;
  for (int i = 0; i < 8; ++i) y.push_back(cplx(0.1 * i - 0.3, 0.05 * i * i - 0.2));
  const auto tr = integrate(s, y, tight());
  const auto rep = conserved_report(s, tr, standard_quantities(s, cplx(0.13, 0.21)));
  EXPECT_LT(rep.get("trL2").max_drift, 1e-8);
  EXPECT_LT(rep.get("casimir").max_drift, 1e-9);
}

TEST(Flows, SpinCalogeroConservation) {
  FlowSpec s;
  s.kind = FlowKind::CM_SPIN;
  s.params.tau = kTau;
  s.params.N = 3;
  CMState cm;
  cm.N = 3;
  cm.u = {cplx(0.11, 0.05), cplx(-0.27, 0.12), cplx(0.16, -0.17)};
  cm.v = {cplx(0.3, -0.1), cplx(-0.2, 0.25), cplx(-0.1, -0.15)};
  cm.p = Mat::Zero(3, 3);
  cm.p << 0, cplx(0.2, 0.1), cplx(-0.3, 0.2), cplx(0.1, -0.4), 0, cplx(0.25, 0.05), cplx(0.3, 0.3), cplx(-0.1, 0.2),
      0;
  s.s_end = 0.5;
  const auto tr = integrate(s, cm.pack(), tight());
  const auto rep = conserved_report(s, tr, standard_quantities(s, cplx(0.13, 0.21)));
  EXPECT_LT(rep.get("H").max_drift, 1e-8);
  EXPECT_LT(rep.get("trL2").max_drift, 1e-8);
}

TEST(Flows, NonAutonomousGyrostatKeepsCasimirOnly) {
  FlowSpec s = zvg_spec();
  s.kind = FlowKind::NAZVG;
  s.params.kappa = 1.0;
  s.t0 = kTau;
  s.direction = cplx(0.1, 0.2);
  const auto tr = integrate(s, kS0, tight());
  const auto rep = conserved_report(s, tr, standard_quantities(s, cplx(0.13, 0.21)));
  EXPECT_FALSE(rep.conservation_expected);
  EXPECT_LT(rep.get("casimir").max_drift, 1e-10);
  EXPECT_GT(rep.get("H").max_drift, 1e-4);
}

TEST(Flows, LaxResidualAlongAutonomousTrajectories) {
  const FlowSpec s = zvg_spec();
  IntegratorOptions o;
  const auto tr = integrate(s, kS0, o);
  const ModularPoint m(kTau);
  for (std::size_t i = 0; i < tr.samples.size(); i += 5) {
    const auto p = build_zvg_lax(GyroState::make({tr.samples[i].state[0], tr.samples[i].state[1], tr.samples[i].state[2]},
                                                 kNuTilde, kTau),
                                 m);
    EXPECT_LT(lax_residual(p.L, p.M, lax_rhs(s), 0.0, cplx(0.13, 0.21)), 1e-6);
  }
}

TEST(Flows, EqualCouplingsCollapseToDoubledArgument) {
  // nu_a = nu for all a: u'' = -nu^2 / (2 pi^2 kappa^2) d/du wp(2u)
  FlowSpec s = epvi_spec();
  const cplx nu(0.6, 0.2), kappa(0.8, 0.1);
  s.params.nu = {nu, nu, nu, nu};
  s.params.kappa = kappa;
  const cplx c = 1.0 / (two_pi_i * kappa);
  for (cplx u : {cplx(0.17, 0.23), cplx(-0.31, 0.12), cplx(0.05, 0.4)}) {
    const cplx tau(0.1, 1.2);
    const cplx upp = c * flow_rhs(s, tau, {u, 0.0})[1];
    const cplx expect = -nu * nu / (2.0 * pi * pi * kappa * kappa) * 2.0 * wp_prime(2.0 * u, tau);
    EXPECT_LT(std::abs(upp - expect) / std::abs(expect), 1e-12);
  }
}

TEST(Flows, PainleveCrosscheckSquaredReadingPasses) {
  const FlowSpec s = epvi_spec();
  IntegratorOptions o;
  o.rtol = 1e-10;
  o.atol = 1e-12;
  const auto tr = integrate(s, {cplx(0.21, 0.17), cplx(0.3, -0.2)}, o);
  const auto sq = pvi_crosscheck(s, tr, PviReading::Squared);
  EXPECT_LT(sq.max_residual, 1e-5);
  EXPECT_LT(sq.max_inversion_error, 1e-8);
  const auto raw = pvi_crosscheck(s, tr, PviReading::Raw);
  EXPECT_GT(raw.max_residual, 1e-2);
}

TEST(Flows, PainleveDictionary) {
  const auto a = pvi_from_epvi({1.0, 2.0, 3.0, 4.0}, 2.0, PviReading::Squared);
  EXPECT_LT(std::abs(a[0] - 0.125), 1e-15);
  EXPECT_LT(std::abs(a[1] + 0.5), 1e-15);
  EXPECT_LT(std::abs(a[2] - 1.125), 1e-15);
  EXPECT_LT(std::abs(a[3] - (0.5 - 2.0)), 1e-15);
  const cplx tau(0.1, 1.3);
  EXPECT_LT(std::abs(tau_from_t(pvi_coordinates(0.3, tau).second, tau + cplx(0.02, -0.01)) - tau), 1e-12);
}

TEST(Flows, HalfPeriodIsAStationarySolution) {
  FlowSpec s = epvi_spec();
  s.params.nu[1] = 0.0;
  const cplx w1 = 0.5;  // omega_1 has no tau dependence
  const auto tr = integrate(s, {w1, 0.0}, tight());
  for (const auto& smp : tr.samples) {
    EXPECT_LT(std::abs(smp.state[0] - w1), 1e-14);
    EXPECT_LT(std::abs(pvi_coordinates(smp.state[0], smp.time).first), 1e-12);
  }
}

TEST(Flows, DormandPrinceOrderFive) {
  // Real rigid-body motion: tau = i, real S, time rotated by i/2.
  FlowSpec s;
  s.kind = FlowKind::ZVG;
  s.params.tau = cplx(0.0, 1.0);
  s.direction = cplx(0.0, 0.5);
  const std::vector<cplx> y0{0.6, -0.5, 0.7};
  IntegratorOptions t;
  t.rtol = 1e-14;
  t.atol = 1e-16;
  const auto ref = integrate(s, y0, t).back().state;
  std::vector<double> lh, le;
  for (double h : {0.0125, 0.00625, 0.003125}) {
    IntegratorOptions o;
    o.fixed_step = true;
    o.h0 = h;
    lh.push_back(std::log(h));
    le.push_back(std::log(max_diff(integrate(s, y0, o).back().state, ref)));
  }
  const double n = static_cast<double>(lh.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lh.size(); ++i) {
    sx += lh[i];
    sy += le[i];
    sxx += lh[i] * lh[i];
    sxy += lh[i] * le[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  EXPECT_NEAR(slope, 5.0, 0.5);
}

TEST(Flows, SmallKappaApproachesAutonomousGyrostat) {
  FlowSpec z = zvg_spec();
  z.direction = 1.0 / two_pi_i;
  const auto ref = integrate(z, kS0, tight()).back().state;
  double prev = 1e9;
  for (double k : {1e-1, 1e-2, 1e-3}) {
    FlowSpec n = zvg_spec();
    n.kind = FlowKind::NAZVG;
    n.params.kappa = k;
    n.t0 = kTau;
    n.direction = k;
    const double d = max_diff(integrate(n, kS0, tight()).back().state, ref);
    EXPECT_LT(d, prev);
    prev = d;
  }
  EXPECT_LT(prev, 1e-2);
}

TEST(Flows, BlowUpReportsLastGoodState) {
  const PathRhs f = [](double, const std::vector<cplx>& y) { return std::vector<cplx>{y[0] * y[0]}; };
  try {
    integrate_path(f, {1.0}, 2.0, IntegratorOptions{});
    FAIL() << "expected a singularity";
  } catch (const SingularityError& e) {
    EXPECT_LT(e.last_good().s, 1.0);
    EXPECT_GT(e.last_good().s, 0.99);
    EXPECT_GT(std::abs(e.last_good().state[0]), 1e3);
  }
}

TEST(Flows, FixedStepTooLargeReportsSingularity) {
  IntegratorOptions o;
  o.fixed_step = true;
  o.h0 = 0.1;
  EXPECT_THROW(integrate(zvg_spec(), kS0, o), SingularityError);
}

TEST(Flows, TauPathBelowFloorIsRejected) {
  FlowSpec s = epvi_spec();
  s.t0 = cplx(0.1, 0.5);
  s.direction = cplx(0.0, -0.4);
  EXPECT_THROW(integrate(s, {cplx(0.21, 0.17), 0.0}), DomainError);
  s.direction = cplx(0.0, 0.4);
  s.params.kappa = 0.0;
  EXPECT_THROW(integrate(s, {cplx(0.21, 0.17), 0.0}), std::invalid_argument);
}

TEST(Flows, Deterministic) {
  const FlowSpec s = zvg_spec();
  const auto a = integrate(s, kS0), b = integrate(s, kS0);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].h, b.samples[i].h);
    EXPECT_EQ(a.samples[i].state, b.samples[i].state);
  }
}
