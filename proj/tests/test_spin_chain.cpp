#include <gtest/gtest.h>

#include "ellwb/spin_chain.hpp"

using namespace ellwb;

namespace {

const cplx kTau(0.1, 1.1);
const cplx kC(1.3, 0.2);

std::vector<std::pair<cplx, cplx>> sample_points(std::uint64_t seed, int count) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> d(-0.45, 0.45);
  std::vector<std::pair<cplx, cplx>> out;
  while (static_cast<int>(out.size()) < count) {
    const cplx z(d(g), d(g)), w(d(g), d(g));
    if (std::abs(z) > 0.05 && std::abs(w) > 0.05 && std::abs(z - w) > 0.05) out.push_back({z, w});
  }
  return out;
}

GyroState& generator_owner(ChainState& c, int k) {
  if (k < 4) return c.minus;
  if (k < 8) return c.plus;
  return c.sites[(k - 8) / 4];
}

void bump(ChainState& c, int k, cplx d) {
  GyroState& g = generator_owner(c, k);
  if (k % 4 == 0)
    g.S0 += d;
  else
    g.S[k % 4 - 1] += d;
}

}  // namespace

TEST(Chain, ConstructionFixesTheSiteConstant) {
  const ModularPoint m(kTau);
  const ChainState s = make_chain(3, kC, 1, m);
  EXPECT_EQ(s.size(), 20);
  EXPECT_EQ(s.pack().size(), 20u);
  for (const GyroState& site : s.sites) EXPECT_LT(std::abs(site_constant(site, m) - kC), 1e-12);
  EXPECT_LT(std::abs(common_constant(s, m) - kC), 1e-12);
}

TEST(Chain, EmptyChainIsTraceOfBoundaries) {
  const ModularPoint m(kTau);
  const ChainState s = make_chain(0, kC, 2, m);
  const cplx z(0.21, 0.17);
  const cplx direct = (boundary_matrix(s.plus, z, m) * boundary_matrix(s.minus, z, m)).trace();
  EXPECT_LT(std::abs(transfer_h(s, z, m) - direct), 1e-13 * std::abs(direct));
}

TEST(Chain, TransferIsPeriodic) {
  const ModularPoint m(kTau);
  for (int n = 0; n <= 3; ++n) {
    const ChainState s = make_chain(n, kC, 10 + n, m);
    for (auto [z, w] : sample_points(5, 3)) {
      (void)w;
      const cplx h = transfer_h(s, z, m);
      EXPECT_LT(std::abs(transfer_h(s, z + 1.0, m) - h), 1e-11 * std::abs(h));
    }
  }
}

TEST(Chain, GradientMatchesDifferenceQuotient) {
  const ModularPoint m(kTau);
  const ChainState s = make_chain(2, kC, 3, m);
  const cplx z(0.13, 0.21);
  const std::vector<cplx> g = transfer_gradient(s, z, m);
  const double h = 1e-6;
  for (int k = 0; k < s.size(); ++k) {
    ChainState p = s, q = s;
    bump(p, k, h);
    bump(q, k, -h);
    const cplx fd = (transfer_h(p, z, m) - transfer_h(q, z, m)) / (2 * h);
    EXPECT_LT(std::abs(fd - g[k]), 1e-7 * std::max(1.0, std::abs(g[k]))) << k;
    // complex direction: h is holomorphic in every generator
    ChainState r = s, t = s;
    bump(r, k, cplx(0, h));
    bump(t, k, cplx(0, -h));
    const cplx fdi = (transfer_h(r, z, m) - transfer_h(t, z, m)) / cplx(0, 2 * h);
    EXPECT_LT(std::abs(fdi - g[k]), 1e-7 * std::max(1.0, std::abs(g[k]))) << k;
  }
}

TEST(Chain, TransferFunctionsCommute) {
  const ModularPoint m(kTau);
  for (int n = 0; n <= 3; ++n) {
    const ChainState s = make_chain(n, kC, 100 + n, m);
    for (auto [z, w] : sample_points(40 + n, 10)) EXPECT_LT(commutativity_residual(s, z, w, m), 1e-9) << n;
  }
}

TEST(Chain, BoundaryFactorIsRequired) {
  const ModularPoint m(kTau);
  for (int n = 1; n <= 3; ++n) {
    const ChainState s = make_chain(n, kC, 200 + n, m);
    const cplx z(0.13, 0.21), w(-0.31, 0.4);
    const double good = commutativity_residual(s, z, w, m);
    const double dropped = commutativity_residual(s, z, w, m, 1.0);
    EXPECT_GT(dropped, 1e-4);
    EXPECT_GT(dropped, 1e3 * std::max(good, 1e-16));
  }
}

TEST(Chain, TrivialBoundaries) {
  // S = nu~ = 0, S0 = 1 gives K = Id
  const ModularPoint m(kTau);
  ChainState s = make_chain(2, kC, 9, m);
  for (GyroState* b : {&s.minus, &s.plus}) {
    *b = GyroState::make({}, {}, kTau);
    b->S0 = 1.0;
    EXPECT_LT(max_abs(boundary_matrix(*b, cplx(0.2, 0.3), m) - Mat::Identity(2, 2)), 1e-15);
  }
  for (auto [z, w] : sample_points(8, 5)) EXPECT_LT(commutativity_residual(s, z, w, m), 1e-9);
}

TEST(Chain, SiteDeterminantsAreCasimirs) {
  const ModularPoint m(kTau);
  const ChainState s = make_chain(3, kC, 4, m);
  for (auto [z, w] : sample_points(12, 3)) {
    (void)w;
    EXPECT_LT(site_determinant_residual(s, z, m), 1e-12);
  }
}

TEST(Chain, SitesDegenerateAtTheSpecialPoint) {
  const ModularPoint m(kTau);
  const ChainState s = make_chain(2, kC, 6, m);
  const cplx z0 = special_point(kC, m);
  EXPECT_LT(std::abs(E2(z0, kTau) - kC), 1e-11);
  for (const GyroState& site : s.sites) {
    const Mat L = site_matrix(site, z0, m), Lm = site_matrix(site, -z0, m);
    EXPECT_LT(std::abs(L.determinant()), 1e-11 * L.squaredNorm());
    EXPECT_LT(max_abs(L * Lm - L.determinant() * Mat::Identity(2, 2)), 1e-11 * L.squaredNorm());
    // away from z0: L(z) L(-z) = det L(z) Id = (C - E2(z)) sum S_a^2 Id
    const cplx z(0.17, 0.29);
    const Mat P = site_matrix(site, z, m) * site_matrix(site, -z, m);
    const cplx det = (kC - E2(z, kTau)) * site.casimir;
    EXPECT_LT(max_abs(P - det * Mat::Identity(2, 2)), 1e-11 * std::abs(det));
  }
  EXPECT_THROW(transfer_h(s, -z0, m), DomainError);
}

TEST(Hamiltonian, CommutesWithTransfer) {
  const ModularPoint m(kTau);
  for (int n = 1; n <= 3; ++n) {
    const ChainState s = make_chain(n, kC, 300 + n, m);
    for (auto [z, w] : sample_points(60 + n, 5)) {
      (void)w;
      EXPECT_LT(hamiltonian_residual(s, z, m), 1e-9) << n;
      EXPECT_GT(hamiltonian_residual(s, z, m, -1), 1e-5) << n;
    }
  }
}

TEST(Hamiltonian, GradientMatchesDifferenceQuotient) {
  const ModularPoint m(kTau);
  const ChainState s = make_chain(2, kC, 5, m);
  const BoundaryHamiltonian H = boundary_hamiltonian(s, m);
  const double h = 1e-6;
  for (int k = 0; k < 8; ++k) {  // boundary generators keep the site constant
    ChainState p = s, q = s;
    bump(p, k, h);
    bump(q, k, -h);
    const cplx fd = (boundary_hamiltonian(p, m).value - boundary_hamiltonian(q, m).value) / (2 * h);
    EXPECT_LT(std::abs(fd - H.gradient[k]), 1e-7 * std::max(1.0, std::abs(H.gradient[k])));
  }
}

TEST(Hamiltonian, SingleSiteHasOnlyBoundaryTerms) {
  const ModularPoint m(kTau);
  ChainState s = make_chain(1, kC, 8, m);
  for (GyroState* b : {&s.minus, &s.plus}) {
    const GyroState old = *b;
    *b = GyroState::make(old.S, {}, kTau);
    b->S0 = old.S0;
  }
  const GyroState& x = s.sites[0];
  auto pair = [&](const GyroState& a) {
    cplx v = a.S0 * x.S0;
    for (int k = 1; k <= 3; ++k) v += a.S[k - 1] * x.S[k - 1] * (kC - m.e_sigma(k));
    return v;
  };
  const cplx expected = std::log(pair(s.minus)) + std::log(pair(s.plus));
  EXPECT_LT(std::abs(boundary_hamiltonian(s, m).value - expected), 1e-12);
}

TEST(Hamiltonian, ConstraintAndDomainErrors) {
  const ModularPoint m(kTau);
  ChainState s = make_chain(2, kC, 11, m);
  s.sites[1].S0 *= 1.01;
  EXPECT_THROW(boundary_hamiltonian(s, m), ConstraintError);
  EXPECT_THROW(boundary_hamiltonian(make_chain(0, kC, 1, m), m), std::invalid_argument);
  ChainState z = make_chain(1, kC, 12, m);
  z.minus = GyroState::make({}, {}, kTau);
  EXPECT_THROW(boundary_hamiltonian(z, m), DomainError);
}
