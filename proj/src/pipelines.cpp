#include "ellwb/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "ellwb/flows.hpp"
#include "ellwb/hecke.hpp"
#include "ellwb/identities.hpp"
#include "ellwb/lax.hpp"
#include "ellwb/poisson.hpp"
#include "ellwb/reflection.hpp"
#include "ellwb/spin_chain.hpp"

namespace ellwb {

CheckResult make_check(std::string name, std::string description, double residual, double tolerance,
                       std::vector<cplx> worst_point) {
  CheckResult c{std::move(name), std::move(description), residual, tolerance, false, false, std::move(worst_point)};
  c.pass = residual < tolerance;  // NaN fails
  return c;
}

CheckResult make_control(std::string name, std::string description, double residual, double threshold) {
  CheckResult c{std::move(name), std::move(description), residual, threshold, true, false, {}};
  c.pass = residual >= threshold;
  return c;
}

bool PipelineReport::pass() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

namespace {

cplx rnd(std::mt19937_64& g, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  const double re = d(g);
  return {re, d(g)};
}

// Keeps the worst residual and where it occurred.
struct Worst {
  double value = 0;
  std::vector<cplx> where;
  void update(double r, std::vector<cplx> at) {
    if (r > value || std::isnan(r)) {
      value = r;
      where = std::move(at);
    }
  }
};

// z away from the lattice and the half-periods.
cplx generic_z(std::mt19937_64& g, cplx tau) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (;;) {
    const double x = d(g);
    const cplx z = x + d(g) * tau;
    bool ok = true;
    for (int a = 0; a < 4; ++a) ok = ok && nearest_lattice_point(z - half_period(a, tau), tau).distance > 0.1;
    if (ok) return z;
  }
}

std::pair<cplx, cplx> generic_zw(std::mt19937_64& g) {
  for (;;) {
    const cplx z = rnd(g, -0.4, 0.4), w = rnd(g, -0.4, 0.4);
    if (std::abs(z - w) > 0.1 && std::abs(z + w) > 0.1 && std::abs(z) > 0.05 && std::abs(w) > 0.05) return {z, w};
  }
}

std::vector<cplx> random_vector(std::mt19937_64& g, int n, double r) {
  std::vector<cplx> x(n);
  for (auto& c : x) c = rnd(g, -r, r);
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------

CheckResult oracle_gate(double tol) {
  const double chars[4][2] = {{0.5, 0.5}, {0.5, 0.0}, {0.0, 0.0}, {0.0, 0.5}};
  Worst w;
  for (int i = 0; i < 10; ++i) {
    const cplx tau(-0.4 + 0.09 * i, 0.5 + 2.5 * i / 9.0);
    for (int j = 0; j < 20; ++j) {
      const cplx z = (-0.45 + 0.047 * j) + (0.37 - 0.041 * j) * tau;
      const auto& ch = chars[(i + j) % 4];
      const cplx a = theta_char(ch[0], ch[1], z, tau);
      const cplx b = theta_char_bruteforce(ch[0], ch[1], z, tau, 60);
      w.update(std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}), {tau, z});
    }
  }
  return make_check("oracle.theta", "adaptive theta series against direct summation over |n| <= 60, 200 points",
                    w.value, tol, w.where);
}

PipelineReport identities_pipeline(std::uint64_t seed, int samples, double tol, const std::vector<cplx>& taus) {
  PipelineReport r{"identities", {}, std::nullopt};
  const SuiteReport s = run_suite(samples, tol, seed, taus);
  for (const CaseReport& c : s.cases) {
    const IdentityCase& ic = find_identity(c.id);
    std::vector<cplx> where{c.tau};
    where.insert(where.end(), c.worst_point.begin(), c.worst_point.end());
    std::string name = "identity." + c.id;
    if (taus.size() > 1) {
      const auto k = std::find(taus.begin(), taus.end(), c.tau) - taus.begin();
      name += "@tau" + std::to_string(k);
    }
    r.checks.push_back(make_check(name, ic.description, c.max_residual, tol, where));
  }
  return r;
}

// ---------------------------------------------------------------------------

namespace {

struct LaxSystem {
  const char* name;
  FlowKind kind;
  // builds the Lax pair for a seeded state and fills the flow parameters
  std::function<LaxPair(std::mt19937_64&, const ModularPoint&, cplx kappa, FlowParams&)> build;
};

std::vector<LaxSystem> lax_systems() {
  auto gyro = [](std::mt19937_64& g, const ModularPoint& m, cplx k, FlowParams& p) {
    const auto S = random_vector(g, 3, 0.6), nt = random_vector(g, 3, 0.4);
    p.nu_tilde = {nt[0], nt[1], nt[2]};
    const GyroState s = GyroState::make({S[0], S[1], S[2]}, p.nu_tilde, m.tau);
    return k == cplx(0.0) ? build_zvg_lax(s, m) : build_nonautonomous(NonAutonomousKind::ZVG, s, m, k);
  };
  auto ci = [](std::mt19937_64& g, const ModularPoint& m, cplx k, FlowParams& p) {
    const auto nu = random_vector(g, 4, 0.4);
    p.nu = {nu[0], nu[1], nu[2], nu[3]};
    const CIState s{cplx(0.1, 0.1) + rnd(g, 0.0, 0.25), rnd(g, -0.5, 0.5), ci_nu_tilde(p.nu)};
    return k == cplx(0.0) ? build_ci_lax(s, m) : build_nonautonomous(NonAutonomousKind::CI, s, m, k);
  };
  auto top = [](std::mt19937_64& g, const ModularPoint& m, cplx k, FlowParams& p) {
    p.N = 3;
    const TopState s{3, random_vector(g, 8, 0.4)};
    return k == cplx(0.0) ? build_top_lax(s, m) : build_nonautonomous(NonAutonomousKind::ET, s, m, k);
  };
  auto cm = [](std::mt19937_64& g, const ModularPoint& m, cplx k, FlowParams& p) {
    p.N = 3;
    CMState s;
    s.N = 3;
    const cplx u0 = cplx(0.11, 0.05) + rnd(g, -0.04, 0.04), u1 = cplx(-0.27, 0.12) + rnd(g, -0.04, 0.04);
    const cplx v0 = rnd(g, -0.3, 0.3), v1 = rnd(g, -0.3, 0.3);
    s.u = {u0, u1, -u0 - u1};
    s.v = {v0, v1, -v0 - v1};
    s.p = Mat::Zero(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) s.p(i, j) = rnd(g, -0.3, 0.3);
    return k == cplx(0.0) ? build_cm_lax(s, m) : build_nonautonomous(NonAutonomousKind::CM, s, m, k);
  };
  return {{"ZVG", FlowKind::ZVG, gyro},   {"CI", FlowKind::CI, ci},       {"ET", FlowKind::ET, top},
          {"CM", FlowKind::CM_SPIN, cm},  {"NAZVG", FlowKind::NAZVG, gyro}, {"EPVI", FlowKind::EPVI, ci},
          {"NAET", FlowKind::NAET, top},  {"NACM", FlowKind::NACM, cm}};
}

}  // namespace

PipelineReport lax_pipeline(std::uint64_t seed, int samples, cplx kappa, const LaxTolerances& tol) {
  PipelineReport r{"lax-check", {}, std::nullopt};
  const auto systems = lax_systems();
  for (std::size_t k = 0; k < systems.size(); ++k) {
    const LaxSystem& s = systems[k];
    const bool iso = is_tau_flow(s.kind);
    std::mt19937_64 g(seed + 1000 * k);
    Worst w;
    for (int i = 0; i < samples; ++i) {
      const cplx tau(0.2 + 0.1 * (i % 3), 0.9 + 0.1 * (i % 4));
      const ModularPoint m(tau);
      FlowSpec spec;
      spec.kind = s.kind;
      spec.params.tau = tau;
      spec.params.kappa = iso ? kappa : cplx(0.0);
      const LaxPair p = s.build(g, m, spec.params.kappa, spec.params);
      const cplx z = generic_z(g, tau);
      const double scale = std::max(1.0, max_abs(p.L(z)) * max_abs(p.M(z)));
      w.update(lax_residual(p.L, p.M, lax_rhs(spec), spec.params.kappa, z) / scale, {tau, z});
    }
    r.checks.push_back(make_check(std::string("lax.") + s.name,
                                  std::string(iso ? "isomonodromic" : "autonomous") + " Lax equation for " +
                                      flow_name(s.kind) + ", max over seeded (state, z)",
                                  w.value, iso ? tol.isomonodromic : tol.autonomous, w.where));
  }
  return r;
}

// ---------------------------------------------------------------------------

namespace {

IntegratorOptions tight() {
  IntegratorOptions o;
  o.rtol = 1e-12;
  o.atol = 1e-14;
  return o;
}

void add_drifts(PipelineReport& r, const FlowSpec& spec, const std::vector<cplx>& y0,
                const ConservationTolerances& tol, bool expect_conservation) {
  const Trajectory tr = integrate(spec, y0, tight());
  const ConservedReport rep = conserved_report(spec, tr, standard_quantities(spec, cplx(0.13, 0.21)));
  for (const QuantityDrift& q : rep.quantities) {
    const bool casimir = q.name == "casimir";
    if (!expect_conservation && !casimir) continue;
    r.checks.push_back(make_check(std::string("drift.") + flow_name(spec.kind) + "." + q.name,
                                  "max drift of " + q.name + " along the " + flow_name(spec.kind) + " trajectory",
                                  q.max_drift, casimir ? tol.casimir : tol.hamiltonian, {tr.samples.back().time}));
  }
}

}  // namespace

PipelineReport conservation_pipeline(const ConservationTolerances& tol, double s_end) {
  PipelineReport r{"integrate", {}, std::nullopt};
  const cplx tau(0.2, 1.0);
  const std::array<cplx, 3> nt{cplx(0.25, -0.1), cplx(0.4, 0.3), cplx(-0.3, 0.2)};
  const std::array<cplx, 4> nu{cplx(0.3, 0.1), cplx(0.25, -0.2), cplx(-0.4, 0.15), cplx(0.35, 0.3)};
  const std::vector<cplx> S0{cplx(0.3, 0.2), cplx(-0.5, 0.1), cplx(0.7, -0.4)};

  FlowSpec z;
  z.kind = FlowKind::ZVG;
  z.params.tau = tau;
  z.params.nu_tilde = nt;
  z.s_end = s_end;
  add_drifts(r, z, S0, tol, true);

  FlowSpec ci;
  ci.kind = FlowKind::CI;
  ci.params.tau = tau;
  ci.params.nu = nu;
  ci.s_end = s_end;
  add_drifts(r, ci, {cplx(0.17, 0.23), cplx(0.4, -0.3)}, tol, true);

  FlowSpec et;
  et.kind = FlowKind::ET;
  et.params.tau = tau;
  et.params.N = 3;
  et.s_end = s_end;
  std::vector<cplx> y;
  for (int i = 0; i < 8; ++i) y.push_back(cplx(0.1 * i - 0.3, 0.05 * i * i - 0.2));
  add_drifts(r, et, y, tol, true);

  FlowSpec na = z;
  na.kind = FlowKind::NAZVG;
  na.params.kappa = 1.0;
  na.t0 = tau;
  na.direction = cplx(0.1, 0.2);
  add_drifts(r, na, S0, tol, false);
  return r;
}

namespace {

FlowKind parse_flow(const std::string& name) {
  for (FlowKind k : {FlowKind::ZVG, FlowKind::NAZVG, FlowKind::CI, FlowKind::EPVI})
    if (name == flow_name(k)) return k;
  throw ConfigError("flow", "expected one of ZVG, NAZVG, CI, EPVI, got '" + name + "'");
}

void push_complex(std::vector<double>& row, cplx c) {
  row.push_back(c.real());
  row.push_back(c.imag());
}

}  // namespace

PipelineReport integrate_pipeline(const RunConfig& c) {
  FlowSpec spec;
  spec.kind = parse_flow(c.flow);
  spec.params.tau = c.tau;
  spec.params.kappa = c.kappa;
  spec.params.nu = c.nu;
  spec.params.nu_tilde = c.nu_tilde;
  spec.s_end = c.s_end;
  std::vector<cplx> y0;
  if (spec.kind == FlowKind::ZVG || spec.kind == FlowKind::NAZVG)
    y0 = {c.S[0], c.S[1], c.S[2]};
  else
    y0 = {c.u, c.v};
  if (is_tau_flow(spec.kind)) {
    spec.t0 = c.tau;
    spec.direction = c.direction;
  }
  PipelineReport r{"integrate", {}, std::nullopt};
  ConservationTolerances tol;
  if (c.tol > 0) tol.hamiltonian = c.tol;
  const Trajectory tr = integrate(spec, y0, tight());
  const ConservedReport rep = conserved_report(spec, tr, standard_quantities(spec, cplx(0.13, 0.21)));
  for (const QuantityDrift& q : rep.quantities) {
    const bool casimir = q.name == "casimir";
    if (!rep.conservation_expected && !casimir) continue;
    r.checks.push_back(make_check(std::string("drift.") + flow_name(spec.kind) + "." + q.name,
                                  "max drift of " + q.name + " along the trajectory", q.max_drift,
                                  casimir ? tol.casimir : tol.hamiltonian, {tr.samples.back().time}));
  }
  if (spec.kind == FlowKind::EPVI) {
    // no first integrals; the trajectory is checked against rational PVI instead
    const PviReport pvi = pvi_crosscheck(spec, tr, PviReading::Squared);
    r.checks.push_back(make_check("pvi.residual", "rational Painleve VI residual of the trajectory mapped to (X, t)",
                                  pvi.max_residual, c.tol > 0 ? c.tol : 1e-5));
  }
  DataTable t;
  t.columns = {"s", "time_re", "time_im"};
  const bool gyro = y0.size() == 3;
  for (const char* n : gyro ? std::vector<const char*>{"S1", "S2", "S3"} : std::vector<const char*>{"u", "v"}) {
    t.columns.push_back(std::string(n) + "_re");
    t.columns.push_back(std::string(n) + "_im");
  }
  for (const auto& smp : tr.samples) {
    std::vector<double> row{smp.s};
    push_complex(row, smp.time);
    for (cplx x : smp.state) push_complex(row, x);
    t.rows.push_back(row);
  }
  r.trajectory = t;
  return r;
}

PipelineReport pvi_pipeline(const std::array<cplx, 4>& nu, cplx u0, cplx v0, cplx tau0, cplx direction, double s_end,
                            double tol) {
  FlowSpec s;
  s.kind = FlowKind::EPVI;
  s.params.nu = nu;
  s.params.kappa = 1.0;
  s.t0 = tau0;
  s.direction = direction;
  s.s_end = s_end;
  IntegratorOptions o;
  o.rtol = 1e-10;
  o.atol = 1e-12;
  const Trajectory tr = integrate(s, {u0, v0}, o);
  const PviReport rep = pvi_crosscheck(s, tr, PviReading::Squared);
  PipelineReport r{"crosscheck-pvi", {}, std::nullopt};
  Worst w;
  for (const PviPoint& p : rep.points) w.update(p.residual, {p.tau, p.t});
  r.checks.push_back(make_check("pvi.residual",
                                "rational Painleve VI residual of the elliptic-form trajectory mapped to (X, t)",
                                rep.max_residual, tol, w.where));
  r.checks.push_back(make_check("pvi.inversion", "|tau(t(tau)) - tau| along the path", rep.max_inversion_error, 1e-8));
  DataTable t;
  t.columns = {"tau_re", "tau_im", "u_re", "u_im", "du_re", "du_im", "X_re", "X_im", "t_re", "t_im", "pvi_residual"};
  for (const PviPoint& p : rep.points) {
    std::vector<double> row;
    for (cplx x : {p.tau, p.u, p.du, p.X, p.t}) push_complex(row, x);
    row.push_back(p.residual);
    t.rows.push_back(row);
  }
  r.trajectory = t;
  return r;
}

PipelineReport hecke_pipeline(const std::array<cplx, 4>& nu, cplx tau, const HeckeTolerances& tol) {
  PipelineReport r{"hecke-map", {}, std::nullopt};
  {
    FlowSpec s;
    s.kind = FlowKind::CI;
    s.params.tau = tau;
    s.params.nu = nu;
    const Trajectory tr = integrate(s, {cplx(0.27, 0.08), cplx(0.5, 0.3)});
    Worst w;
    for (const auto& smp : tr.samples) w.update(pushforward_residual(s, smp.time, smp.state), {smp.time});
    r.checks.push_back(make_check("hecke.CI_to_ZVG", "CI trajectory through the modification satisfies the gyrostat flow",
                                  w.value, tol.autonomous, w.where));
  }
  {
    FlowSpec s;
    s.kind = FlowKind::EPVI;
    s.params.nu = nu;
    s.params.kappa = 1.0;
    s.t0 = tau;
    s.direction = cplx(0.1, 0.05);
    const Trajectory tr = integrate(s, {cplx(0.27, 0.08), cplx(0.5, 0.3)});
    Worst w;
    for (const auto& smp : tr.samples) w.update(pushforward_residual(s, smp.time, smp.state), {smp.time});
    r.checks.push_back(make_check("hecke.EPVI_to_NAZVG",
                                  "Painleve trajectory through the modification satisfies the non-autonomous gyrostat "
                                  "flow at kappa = 1",
                                  w.value, tol.isomonodromic, w.where));
  }
  return r;
}

// ---------------------------------------------------------------------------

PipelineReport poisson_pipeline(std::uint64_t seed, cplx tau, const PoissonTolerances& tol) {
  PipelineReport r{"poisson-check", {}, std::nullopt};
  const ModularPoint m(tau);
  std::mt19937_64 g(seed);
  auto gyro = [&](bool with_nu) {
    std::array<cplx, 3> nt{};
    if (with_nu) {
      const auto v = random_vector(g, 3, 0.5);
      nt = {v[0], v[1], v[2]};
    }
    const auto S = random_vector(g, 3, 1.0);
    GyroState s = GyroState::make({S[0], S[1], S[2]}, nt, tau);
    s.S0 = rnd(g, -1, 1);
    return s;
  };
  const GyroState base = gyro(true);
  const std::array<cplx, 3> np = base.nu_prime;

  std::vector<std::pair<std::string, BracketTable>> tables{
      {"linear_sl2", linear_sl2_table()}, {"linear_sl3", linear_sln_table(3)},   {"linear_sl4", linear_sln_table(4)},
      {"sfo_2", sfo_table(2, m)},          {"sfo_3", sfo_table(3, m)},           {"sfo_4", sfo_table(4, m)},
      {"sklyanin", sklyanin_table(m, np)}, {"boundary", boundary_table(m, np)}, {"sites_3", site_table(m, 3)}};
  for (auto& [name, t] : tables) {
    Worst w;
    for (int k = 0; k < 20; ++k) w.update(jacobi_residual(t, random_vector(g, t.size(), 1.0)), {});
    r.checks.push_back(make_check("jacobi." + name, "Jacobi identity of the " + name + " bracket table, 20 states",
                                  w.value, tol.jacobi));
  }

  Worst cas;
  for (int k = 0; k < 20; ++k) {
    const GyroState s = gyro(true);
    const std::vector<cplx> x{s.S0, s.S[0], s.S[1], s.S[2]};
    for (const BracketTable& t : {sklyanin_table(m, s.nu_prime), boundary_table(m, s.nu_prime)}) {
      const SklyaninCasimirs c = sklyanin_casimirs(t, m, s.nu_prime);
      for (int i = 0; i < 4; ++i) {
        const Polynomial xi = Polynomial::variable(4, i);
        cas.update(std::abs(bracket_of_functions(t, c.c1, xi, x)), x);
        cas.update(std::abs(bracket_of_functions(t, c.c2, xi, x)), x);
      }
    }
  }
  r.checks.push_back(make_check("casimir.sklyanin", "c1, c2 Poisson-commute with every generator", cas.value,
                                tol.casimir, cas.where));

  Worst quad, lin;
  for (int k = 0; k < 10; ++k) {
    const GyroState s = gyro(true);
    const auto [z, w] = generic_zw(g);
    const ReflectionResiduals rr = reflection_bracket_check(s, z, w, m);
    quad.update(rr.quadratic, {z, w});
    lin.update(rr.linear, {z, w});
  }
  r.checks.push_back(make_check("reflection.classical_quadratic",
                                "quadratic classical reflection relation for L~ under the Sklyanin brackets",
                                quad.value, tol.reflection, quad.where));
  r.checks.push_back(make_check("reflection.classical_linear",
                                "linear classical reflection relation under the sl(2) brackets", lin.value,
                                tol.reflection, lin.where));

  Worst flow, pen;
  for (int k = 0; k < 10; ++k) {
    const BihamiltonianResiduals b = bihamiltonian_check(gyro(true), m);
    flow.update(b.flow, {});
    pen.update(b.pencil, {});
  }
  for (int N : {2, 3, 4}) flow.update(top_bihamiltonian_check(random_vector(g, N * N - 1, 1.0), N, m), {double(N)});
  r.checks.push_back(make_check("bihamiltonian.flow", "{S0, S} of the quadratic bracket generates the gyrostat and top flows",
                                flow.value, tol.bihamiltonian, flow.where));
  for (int N : {2, 3})
    for (cplx l : {0.5, 1.0, 2.0}) {
      const BracketTable p = pencil(sfo_table(N, m), linear_sln_table(N), l);
      pen.update(jacobi_residual(p, random_vector(g, p.size(), 1.0)), {double(N), l});
    }
  r.checks.push_back(make_check("bihamiltonian.pencil", "Jacobi identity along quadratic + lambda linear pencils",
                                pen.value, tol.pencil, pen.where));
  return r;
}

PipelineReport reflection_pipeline(std::uint64_t seed, cplx tau, cplx hbar, const std::array<cplx, 3>& nu_tilde,
                                   const ReflectionTolerances& tol) {
  PipelineReport r{"reflection-check", {}, std::nullopt};
  const ModularPoint m(tau);
  std::mt19937_64 g(seed);
  Worst refl, chain;
  for (int k = 0; k < 20; ++k) {
    const auto [z, w] = generic_zw(g);
    const ReflectionReport rr = reflection_residual(z, w, hbar, nu_tilde, m);
    refl.update(rr.residual, {z, w});
    chain.update(rr.channel_chain, {z, w});
  }
  r.checks.push_back(make_check("quantum.reflection",
                                "quantum reflection equation reduces to zero modulo the six algebra relations",
                                refl.value, tol.reflection, refl.where));
  r.checks.push_back(make_check("quantum.channel_identities",
                                "coefficient identities of the 1 (x) sigma_gamma channel", chain.value,
                                tol.reflection, chain.where));
  const CentralReport c = central_check(hbar, nu_tilde, m);
  r.checks.push_back(make_check("quantum.central_C1", "[C1, S_a] lies in the degree-3 ideal", c.c1, tol.central));
  r.checks.push_back(make_check("quantum.central_C2", "[C2, S_a] lies in the degree-3 ideal", c.c2, tol.central));
  Worst det;
  for (int k = 0; k < 10; ++k) {
    cplx z = rnd(g, -0.45, 0.45);
    while (std::abs(z) < 0.05) z = rnd(g, -0.45, 0.45);
    det.update(quantum_determinant(z, hbar, nu_tilde, m).residual, {z});
  }
  r.checks.push_back(make_check("quantum.determinant", "quantum determinant lies in span{1, C1, C2} modulo the relations",
                                det.value, tol.determinant, det.where));
  r.checks.push_back(make_check("quantum.classical_limit",
                                "hbar -> 0 of the relations against the Sklyanin brackets, extrapolated from "
                                "hbar = 1e-3, 1e-4",
                                classical_limit_deviation(nu_tilde, m), tol.classical_limit));
  return r;
}

PipelineReport chain_pipeline(std::uint64_t seed, cplx tau, int max_sites, const ChainTolerances& tol) {
  PipelineReport r{"chain-check", {}, std::nullopt};
  const ModularPoint m(tau);
  const cplx C(1.3, 0.2);
  std::mt19937_64 g(seed);
  double ratio = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= max_sites; ++n) {
    const ChainState s = make_chain(n, C, seed + 17 * n, m);
    Worst comm, ham;
    for (int k = 0; k < 10; ++k) {
      const auto [z, w] = generic_zw(g);
      comm.update(commutativity_residual(s, z, w, m), {z, w});
      if (n > 0) ham.update(hamiltonian_residual(s, z, m), {z});
    }
    const std::string tag = std::to_string(n);
    r.checks.push_back(make_check("chain.commute." + tag, "{h(z), h(w)} with " + tag + " sites", comm.value,
                                  tol.commutativity, comm.where));
    if (n > 0) {
      r.checks.push_back(make_check("chain.hamiltonian." + tag,
                                    "{H, h(z)} with " + tag + " sites under the equal-C constraint", ham.value,
                                    tol.hamiltonian, ham.where));
      const cplx z(0.13, 0.21), w(-0.31, 0.4);
      const double good = commutativity_residual(s, z, w, m);
      const double dropped = commutativity_residual(s, z, w, m, 1.0);
      ratio = std::min(ratio, dropped / std::max(good, 1e-300));
    }
  }
  if (max_sites > 0)
    r.checks.push_back(make_control("chain.control.boundary_factor",
                                    "ratio of {h, h} with unit boundary brackets to the correct one (must be large)",
                                    ratio, tol.control_ratio));
  return r;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& pipeline_commands() {
  static const std::vector<std::string> c{"identities",    "integrate",        "lax-check",   "hecke-map",
                                          "poisson-check", "reflection-check", "chain-check", "crosscheck-pvi"};
  return c;
}

void validate(const RunConfig& c) {
  const auto& cmds = pipeline_commands();
  if (std::find(cmds.begin(), cmds.end(), c.command) == cmds.end())
    throw ConfigError("command", "unknown command '" + c.command + "'");
  if (!(c.tau.imag() > 0)) throw ConfigError("tau-im", "Im tau must be positive");
  if (c.tol < 0 || std::isnan(c.tol)) throw ConfigError("tol", "tolerance must be positive");
  if (c.samples < 0) throw ConfigError("samples", "must be non-negative");
  if (c.sites < 0 || c.sites > 8) throw ConfigError("sites", "must be between 0 and 8");
  if (!(c.s_end > 0)) throw ConfigError("s-end", "must be positive");
  if (c.hbar == cplx(0.0)) throw ConfigError("hbar", "must be nonzero");
  if (c.command == "integrate") parse_flow(c.flow);
}

PipelineReport run_pipeline(const RunConfig& c) {
  validate(c);
  auto pick = [&](double def) { return c.tol > 0 ? c.tol : def; };
  auto count = [&](int def) { return c.samples > 0 ? c.samples : def; };
  if (c.command == "identities") return identities_pipeline(c.seed, count(100), pick(1e-9), {c.tau});
  if (c.command == "integrate") return integrate_pipeline(c);
  if (c.command == "lax-check") {
    LaxTolerances t;
    if (c.tol > 0) t.autonomous = t.isomonodromic = c.tol;
    return lax_pipeline(c.seed, count(20), c.kappa, t);
  }
  if (c.command == "hecke-map") {
    HeckeTolerances t;
    if (c.tol > 0) t.autonomous = t.isomonodromic = c.tol;
    return hecke_pipeline(c.nu, c.tau, t);
  }
  if (c.command == "poisson-check") {
    PoissonTolerances t;
    if (c.tol > 0) t.jacobi = t.casimir = t.reflection = t.bihamiltonian = t.pencil = c.tol;
    return poisson_pipeline(c.seed, c.tau, t);
  }
  if (c.command == "reflection-check") {
    ReflectionTolerances t;
    if (c.tol > 0) t.reflection = t.central = t.determinant = t.classical_limit = c.tol;
    return reflection_pipeline(c.seed, c.tau, c.hbar, c.nu_tilde, t);
  }
  if (c.command == "chain-check") {
    ChainTolerances t;
    if (c.tol > 0) t.commutativity = t.hamiltonian = c.tol;
    return chain_pipeline(c.seed, c.tau, c.sites, t);
  }
  // crosscheck-pvi: tau is the starting point of the path
  return pvi_pipeline(c.nu, c.u, c.v, c.tau, c.direction, c.s_end, pick(1e-5));
}

}  // namespace ellwb
