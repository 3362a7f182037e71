#include <gtest/gtest.h>

#include <random>

#include "ellwb/poisson.hpp"
#include "ellwb/reflection.hpp"

using namespace ellwb;

namespace {

const cplx kTau(0.2, 1.0);
const cplx kHbar(0.17, 0.05);
const std::array<cplx, 3> kNu{cplx(0.3, 0.1), cplx(-0.2, 0.4), cplx(0.5, -0.3)};
const std::array<cplx, 3> kNoNu{};

cplx rnd(std::mt19937_64& g, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return {d(g), d(g)};
}

std::pair<cplx, cplx> rnd_zw(std::mt19937_64& g) {
  for (;;) {
    const cplx z = rnd(g, -0.4, 0.4), w = rnd(g, -0.4, 0.4);
    if (std::abs(z - w) > 0.1 && std::abs(z + w) > 0.1 && std::abs(z) > 0.05 && std::abs(w) > 0.05) return {z, w};
  }
}

// Coefficient vector over all words of length <= 2.
Vec words2(const NCPoly& p) {
  Vec v = Vec::Zero(21);
  for (const auto& [w, c] : p.terms()) {
    int k = 0;
    if (w.size() == 1) k = 1 + w[0];
    if (w.size() == 2) k = 5 + 4 * w[0] + w[1];
    v(k) = c;
  }
  return v;
}

}  // namespace

TEST(NCPoly, WordsAndDegree) {
  const NCPoly a = NCPoly::generator(1), b = NCPoly::generator(2);
  const NCPoly p = a * b * cplx(2.0) + NCPoly::constant(3.0);
  EXPECT_EQ(p.degree(), 2);
  EXPECT_EQ(p.coefficient({1, 2}), cplx(2.0));
  EXPECT_EQ(p.coefficient({2, 1}), cplx(0.0));
  EXPECT_EQ(commutator(a, b).coefficient({2, 1}), cplx(-1.0));
  EXPECT_TRUE((p - p).is_zero());
  EXPECT_EQ(NCPoly().degree(), -1);
  // graded lexicographic: shorter words first, then S0 < S1 < S2 < S3
  const NCPoly q = NCPoly::word({3}) + NCPoly::word({0, 0}) + NCPoly::word({1}) + NCPoly::constant(1.0);
  std::vector<Word> order;
  for (const auto& [w, c] : q.terms()) order.push_back(w);
  EXPECT_EQ(order, (std::vector<Word>{{}, {1}, {3}, {0, 0}}));
}

TEST(NCPoly, DegreeCapIsEnforced) {
  const NCPoly x = NCPoly::generator(0) * NCPoly::generator(1);
  EXPECT_THROW(x * x, std::length_error);
  EXPECT_TRUE(NCPoly::product(x, x, true).is_zero());
  EXPECT_EQ(NCPoly::product(x + NCPoly::constant(1.0), x, true).degree(), 2);
  EXPECT_THROW(NCPoly::word({0, 1, 2, 3}), std::length_error);
  EXPECT_THROW(NCPoly::generator(4), std::out_of_range);
}

TEST(Relations, ShapeAndConstants) {
  const ModularPoint m(kTau);
  const RelationSet r = make_relations(kHbar, kNu, m);
  ASSERT_EQ(r.relations.size(), 6u);
  for (const NCPoly& p : r.relations) EXPECT_EQ(p.degree(), 2);
  for (int a = 1; a <= 3; ++a) {
    const cplx w = sigma_half_period(a, kTau);
    EXPECT_NEAR(std::abs(r.K[a] - (E1(kHbar + w, kTau) - E1(kHbar, kTau) - E1(w, kTau))), 0, 1e-13);
  }
  // nu~ = 0 drops the degree-one words
  for (const NCPoly& p : make_relations(kHbar, kNoNu, m).relations)
    for (const auto& [w, c] : p.terms()) EXPECT_EQ(w.size(), 2u);
}

TEST(RMatrix, ClassicalLimit) {
  const ModularPoint m(kTau);
  const cplx z(0.23, 0.11), w(-0.14, 0.27);
  Mat id = Mat::Identity(4, 4);
  for (int sign : {1, -1}) {
    double prev = 0;
    for (double h : {1e-3, 1e-4}) {
      const Mat lead = R_pm(sign, z, w, h, m) - (2.0 / h + E1(z + double(sign) * w, kTau)) * id;
      const double err = max_abs(lead - reflection_r(z, w, m, sign));
      if (prev > 0) {
        EXPECT_GT(prev / err, 9.0);  // first order in hbar
      }
      EXPECT_LT(err, 50 * h);
      prev = err;
    }
  }
  EXPECT_THROW(R_pm(1, cplx(0.2, 0.1), cplx(-0.2, -0.1), kHbar, m), PoleError);
  EXPECT_THROW(R_pm(0, z, w, kHbar, m), std::invalid_argument);
}

TEST(RMatrix, ArgumentSymmetry) {
  const ModularPoint m(kTau);
  const cplx z(0.23, 0.11), w(-0.14, 0.27);
  EXPECT_LT(max_abs(R_pm(1, z, w, kHbar, m) - R_pm(1, w, z, kHbar, m)), 1e-13);
  EXPECT_LT(max_abs(R_pm(-1, z, w, kHbar, m) - R_pm(1, z, -w, kHbar, m)), 1e-13);
}

TEST(QuantumLax, ClassicalLimitWithScaledS0) {
  const ModularPoint m(kTau);
  const GyroState g = GyroState::make({cplx(0.4, 0.1), cplx(-0.3, 0.2), cplx(0.6, -0.5)}, kNu, kTau);
  GyroState gs = g;
  gs.S0 = cplx(0.7, -0.2);
  const cplx z(0.31, 0.17);
  const double h = 1e-6;
  const QuantumLax L = quantum_lax(h, kNu, z, m);
  Mat lead = Mat::Zero(2, 2);
  const std::array<cplx, 4> S{gs.S0 * h, g.S[0], g.S[1], g.S[2]};
  for (int a = 0; a < 4; ++a) lead += (L.s[a] * S[a] + L.c[a]) * pauli(a);
  EXPECT_LT(max_abs(lead - gyro_lax_tilde(gs, m, z)), 1e-4);
}

TEST(QuantumLax, EntriesAndPlusCompanion) {
  const ModularPoint m(kTau);
  const cplx z(0.31, 0.17);
  const QuantumLax L = quantum_lax(kHbar, kNu, z, m), P = quantum_lax(kHbar, kNu, z, m, true);
  EXPECT_EQ(L.s[0], P.s[0]);
  for (int a = 1; a <= 3; ++a) {
    EXPECT_EQ(L.s[a], -P.s[a]);
    EXPECT_EQ(L.c[a], -P.c[a]);
  }
  // (1,0) entry = sigma_1 + sigma_2 parts: S1 s1 + i S2 s2
  const NCPoly e10 = L.entry(1, 0);
  EXPECT_EQ(e10.coefficient({1}), L.s[1]);
  EXPECT_EQ(e10.coefficient({2}), cplx(0, 1) * L.s[2]);
  EXPECT_EQ(e10.coefficient({}), L.c[1] + cplx(0, 1) * L.c[2]);
}

TEST(QuantumLax, CoefficientsInvertAtNuZero) {
  // at nu~ = 0 the sigma decomposition of one sample recovers (S0, S1, S2, S3)
  const ModularPoint m(kTau);
  const std::array<cplx, 4> S{cplx(0.3, 0.2), cplx(-0.5, 0.1), cplx(0.2, 0.9), cplx(1.1, -0.4)};
  const QuantumLax L = quantum_lax(kHbar, kNoNu, cplx(0.27, 0.08), m);
  Mat X = Mat::Zero(2, 2);
  for (int a = 0; a < 4; ++a) X += L.s[a] * S[a] * pauli(a);
  for (int a = 0; a < 4; ++a) {
    const cplx coef = (pauli(a) * X).trace() / 2.0;
    EXPECT_LT(std::abs(coef / L.s[a] - S[a]), 1e-13);
  }
}

TEST(Reflection, ResidualSpanIsTheRelationSpan) {
  // Independent route: the LHS - RHS entries at several (z, w), collected
  // without reference to the relations, span exactly six directions, and each
  // relation lies in that span.
  const ModularPoint m(kTau);
  std::mt19937_64 g(11);
  std::vector<Vec> cols;
  for (int s = 0; s < 6; ++s) {
    auto [z, w] = rnd_zw(g);
    for (const NCPoly& p : reflection_difference(z, w, kHbar, kNu, m)) cols.push_back(words2(p));
  }
  Mat A(21, cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) A.col(k) = cols[k];
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  EXPECT_GT(sv(5) / sv(0), 1e-6);
  EXPECT_LT(sv(6) / sv(0), 1e-13);
  const Mat U = svd.matrixU().leftCols(6);
  for (const NCPoly& r : make_relations(kHbar, kNu, m).relations) {
    const Vec v = words2(r);
    EXPECT_LT((v - U * (U.adjoint() * v)).norm() / v.norm(), 1e-12);
  }
  RelationOptions printed;
  printed.nu_sign = -1;
  double worst = 0;
  for (const NCPoly& r : make_relations(kHbar, kNu, m, printed).relations) {
    const Vec v = words2(r);
    worst = std::max(worst, (v - U * (U.adjoint() * v)).norm() / v.norm());
  }
  EXPECT_GT(worst, 1e-3);
}

TEST(Reflection, IdealMembershipAtSeededPoints) {
  const ModularPoint m(kTau);
  std::mt19937_64 g(2024);
  for (int s = 0; s < 20; ++s) {
    auto [z, w] = rnd_zw(g);
    const ReflectionReport r = reflection_residual(z, w, kHbar, kNu, m);
    EXPECT_LT(r.residual, 1e-9) << z << " " << w;
    EXPECT_LT(r.channel_chain, 1e-9) << z << " " << w;
  }
}

TEST(Reflection, NuZeroIsTheSklyaninAlgebra) {
  const ModularPoint m(kTau);
  std::mt19937_64 g(7);
  for (int s = 0; s < 5; ++s) {
    auto [z, w] = rnd_zw(g);
    EXPECT_LT(reflection_residual(z, w, kHbar, kNoNu, m).residual, 1e-9);
  }
  // at nu~ = 0 the sign of the linear term is immaterial
  RelationOptions printed;
  printed.nu_sign = -1;
  EXPECT_LT(reflection_residual(cplx(0.2, 0.1), cplx(-0.1, 0.3), kHbar, kNoNu, m, printed).residual, 1e-9);
}

TEST(Reflection, MutationsAreDetected) {
  const ModularPoint m(kTau);
  const cplx z(0.21, 0.13), w(-0.11, 0.3);
  for (int a = 1; a <= 3; ++a) {
    RelationOptions o;
    o.k_scale[a] = 1.01;
    EXPECT_GT(reflection_residual(z, w, kHbar, kNu, m, o).residual, 1e-3);
  }
  RelationOptions printed;
  printed.nu_sign = -1;
  EXPECT_GT(reflection_residual(z, w, kHbar, kNu, m, printed).residual, 1e-3);
}

TEST(Reflection, LatticeTranslationInvariance) {
  const ModularPoint m(kTau);
  const cplx z(0.21, 0.13), w(-0.11, 0.3);
  EXPECT_LT(reflection_residual(z + 1.0, w, kHbar, kNu, m).residual, 1e-9);
  EXPECT_LT(reflection_residual(z, w + 1.0, kHbar, kNu, m).residual, 1e-9);
}

TEST(Reflection, DegenerateSpanRaises) {
  const ModularPoint m(kTau);
  RelationSet r = make_relations(kHbar, kNu, m);
  r.relations[1] = r.relations[0] * cplx(2.0);
  EXPECT_THROW(IdealReducer(r, 2), ConditioningError);
  EXPECT_THROW(IdealReducer(r, 4), std::invalid_argument);
}

TEST(Central, CasimirsAreCentral) {
  const ModularPoint m(kTau);
  for (const auto& nu : {kNu, kNoNu}) {
    const CentralReport c = central_check(kHbar, nu, m);
    EXPECT_LT(c.c1, 1e-9);
    EXPECT_LT(c.c2, 1e-9);
  }
  const CentralReport other = central_check(cplx(0.31, -0.12), kNu, m);
  EXPECT_LT(other.c1, 1e-9);
  EXPECT_LT(other.c2, 1e-9);
}

TEST(Central, NonCentralElementsAreRejected) {
  const ModularPoint m(kTau);
  const RelationSet rel = make_relations(kHbar, kNu, m);
  const IdealReducer ideal(rel, 3);
  EXPECT_GT(central_residual(NCPoly::word({1, 1}), ideal), 1e-3);
  // C2 with the opposite sign of the linear part
  const QuantumCasimirs cas = quantum_casimirs(rel);
  NCPoly flipped = cas.c2;
  for (int a = 1; a <= 3; ++a) flipped -= NCPoly::word({a}, 2.0 * cas.c2.coefficient({a}));
  EXPECT_GT(central_residual(flipped, ideal), 1e-3);
  // the opposite-sign relations break centrality of C2
  RelationOptions printed;
  printed.nu_sign = -1;
  EXPECT_GT(central_check(kHbar, kNu, m, printed).c2, 1e-3);
}

TEST(QuantumDeterminant, LiesInCasimirSpan) {
  const ModularPoint m(kTau);
  std::mt19937_64 g(99);
  for (int s = 0; s < 10; ++s) {
    const cplx z = rnd(g, -0.45, 0.45);
    if (std::abs(z) < 0.05) continue;
    const QuantumDeterminant q = quantum_determinant(z, kHbar, kNu, m);
    EXPECT_LT(q.residual, 1e-8) << z;
    EXPECT_EQ(q.value.degree(), 2);
  }
}

TEST(QuantumDeterminant, PrintedCompanionIsNotInSpan) {
  const ModularPoint m(kTau);
  for (const auto& nu : {kNu, kNoNu})
    EXPECT_GT(quantum_determinant(cplx(0.21, 0.13), kHbar, nu, m, QdetForm::Printed).residual, 1e-3);
}

TEST(QuantumDeterminant, NuZeroCoefficients) {
  // At nu~ = 0, tr P(L^(z) L^(-z)) = 4 sum_a phi_a(z) phi_a(-z) S^_a^2 and
  // phi(u, z) phi(u, -z) = wp(u) - wp(z): the C1 coefficient moves by -4 wp(z),
  // the C2 coefficient and the constant do not depend on z.
  const ModularPoint m(kTau);
  const cplx z1(0.21, 0.13), z2(-0.3, 0.27);
  const QuantumDeterminant a = quantum_determinant(z1, kHbar, kNoNu, m);
  const QuantumDeterminant b = quantum_determinant(z2, kHbar, kNoNu, m);
  EXPECT_LT(a.residual, 1e-8);
  EXPECT_LT(std::abs(a.unit), 1e-10);
  EXPECT_LT(std::abs(a.c2 - b.c2), 1e-10 * std::max(1.0, std::abs(a.c2)));
  EXPECT_LT(std::abs((a.c1 - b.c1) + 4.0 * (wp(z1, kTau) - wp(z2, kTau))), 1e-9);
}

TEST(QuantumDeterminant, PeriodicInZ) {
  const ModularPoint m(kTau);
  const cplx z(0.21, 0.13);
  const QuantumDeterminant a = quantum_determinant(z, kHbar, kNu, m);
  const QuantumDeterminant b = quantum_determinant(z + 1.0, kHbar, kNu, m);
  EXPECT_LT(std::abs(a.c1 - b.c1), 1e-9 * std::abs(a.c1));
  EXPECT_LT(std::abs(a.c2 - b.c2), 1e-9 * std::max(1.0, std::abs(a.c2)));
  EXPECT_LT(std::abs(a.unit - b.unit), 1e-9 * std::max(1.0, std::abs(a.unit)));
}

TEST(ClassicalLimit, RelationsReduceToSklyaninBrackets) {
  const ModularPoint m(kTau);
  EXPECT_LT(classical_limit_deviation(kNu, m), 1e-6);
  EXPECT_LT(classical_limit_deviation(kNoNu, m), 1e-6);
  RelationOptions printed;
  printed.nu_sign = -1;
  EXPECT_GT(classical_limit_deviation(kNu, m, printed), 1e-2);
}
