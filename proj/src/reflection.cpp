#include "ellwb/reflection.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ellwb/identities.hpp"
#include "ellwb/poisson.hpp"

namespace ellwb {

namespace {

constexpr std::array<std::array<int, 3>, 3> kCyclic{{{1, 2, 3}, {2, 3, 1}, {3, 1, 2}}};

int word_space_dim(int degree) {
  int d = 0, p = 1;
  for (int k = 0; k <= degree; ++k, p *= 4) d += p;
  return d;
}

int word_position(const Word& w) {
  int offset = 0, p = 1;
  for (std::size_t k = 0; k < w.size(); ++k, p *= 4) offset += p;
  int v = 0;
  for (int g : w) v = 4 * v + g;
  return offset + v;
}

Vec to_vector(const NCPoly& p, int degree) {
  Vec v = Vec::Zero(word_space_dim(degree));
  for (const auto& [w, c] : p.terms()) {
    if (static_cast<int>(w.size()) > degree) throw std::length_error("NCPoly above the reducer degree");
    v(word_position(w)) = c;
  }
  return v;
}

// Polynomial with 4x4 matrix coefficients, for assembling the reflection equation.
using MatPoly = std::map<Word, Mat, WordOrder>;

MatPoly constant_mat(const Mat& a) { return {{Word{}, a}}; }

MatPoly mat_product(const MatPoly& a, const MatPoly& b) {
  MatPoly out;
  for (const auto& [wa, ma] : a)
    for (const auto& [wb, mb] : b) {
      Word w = wa;
      w.insert(w.end(), wb.begin(), wb.end());
      auto it = out.find(w);
      if (it == out.end())
        out.emplace(w, ma * mb);
      else
        it->second += ma * mb;
    }
  return out;
}

// L^ placed in the first (slot 1) or second (slot 2) tensor factor.
MatPoly embed(const QuantumLax& L, int slot) {
  const Mat id = Mat::Identity(2, 2);
  auto place = [&](const Mat& x) { return slot == 1 ? kron(x, id) : kron(id, x); };
  MatPoly out;
  Mat cst = Mat::Zero(2, 2);
  for (int a = 0; a < 4; ++a) {
    out[Word{a}] = place(L.s[a] * pauli(a));
    cst += L.c[a] * pauli(a);
  }
  out[Word{}] = place(cst);
  return out;
}

cplx K_const(int alpha, cplx h, const ModularPoint& m) {
  const cplx w = sigma_half_period(alpha, m.tau);
  return E1(h + w, m.tau) - E1(h, m.tau) - E1(w, m.tau);
}

cplx rho_const(int alpha, cplx h, const ModularPoint& m) {
  const cplx w = sigma_half_period(alpha, m.tau);
  return -e(-w * sigma_half_period_dtau(alpha)) * phi(w + h, -w, m);
}

Eigen::JacobiSVD<Mat> checked_svd(const Mat& A, int need, const char* what) {
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > IdealReducer::kSingularCutoff * s(0)) ++rank;
  if (rank < need)
    throw ConditioningError(std::string(what) + ": rank " + std::to_string(rank) + " < " + std::to_string(need));
  return svd;
}

}  // namespace

// ---------------------------------------------------------------------------

NCPoly NCPoly::constant(cplx c) { return word({}, c); }
NCPoly NCPoly::generator(int a) {
  if (a < 0 || a > 3) throw std::out_of_range("NCPoly generator index");
  return word({a});
}
NCPoly NCPoly::word(const Word& w, cplx c) {
  if (static_cast<int>(w.size()) > kMaxDegree) throw std::length_error("NCPoly word above degree 3");
  NCPoly p;
  p.add(w, c);
  return p;
}

void NCPoly::add(const Word& w, cplx c) {
  if (c == cplx(0)) return;
  auto it = t_.find(w);
  if (it == t_.end()) {
    t_.emplace(w, c);
    return;
  }
  it->second += c;
  if (it->second == cplx(0)) t_.erase(it);
}

cplx NCPoly::coefficient(const Word& w) const {
  auto it = t_.find(w);
  return it == t_.end() ? cplx(0) : it->second;
}

int NCPoly::degree() const { return t_.empty() ? -1 : static_cast<int>(t_.rbegin()->first.size()); }

double NCPoly::norm() const {
  double s = 0;
  for (const auto& [w, c] : t_) s += std::norm(c);
  return std::sqrt(s);
}

NCPoly& NCPoly::operator+=(const NCPoly& o) {
  for (const auto& [w, c] : o.t_) add(w, c);
  return *this;
}
NCPoly& NCPoly::operator-=(const NCPoly& o) {
  for (const auto& [w, c] : o.t_) add(w, -c);
  return *this;
}
NCPoly& NCPoly::operator*=(cplx c) {
  if (c == cplx(0)) {
    t_.clear();
    return *this;
  }
  for (auto& [w, x] : t_) x *= c;
  return *this;
}

NCPoly NCPoly::product(const NCPoly& a, const NCPoly& b, bool truncate) {
  NCPoly out;
  for (const auto& [wa, ca] : a.t_)
    for (const auto& [wb, cb] : b.t_) {
      if (static_cast<int>(wa.size() + wb.size()) > kMaxDegree) {
        if (truncate) continue;
        throw std::length_error("NCPoly product above degree 3");
      }
      Word w = wa;
      w.insert(w.end(), wb.begin(), wb.end());
      out.add(w, ca * cb);
    }
  return out;
}

NCPoly commutator(const NCPoly& a, const NCPoly& b) { return a * b - b * a; }

// ---------------------------------------------------------------------------

RelationSet make_relations(cplx hbar, const std::array<cplx, 3>& nu_tilde, const ModularPoint& m,
                           const RelationOptions& opt) {
  RelationSet r;
  r.hbar = hbar;
  r.nu_tilde = nu_tilde;
  for (int a = 1; a <= 3; ++a) {
    r.K[a] = opt.k_scale[a] * K_const(a, hbar, m);
    r.rho[a] = rho_const(a, hbar, m);
  }
  const cplx I(0, 1);
  for (auto [al, be, ga] : kCyclic) {
    NCPoly p64 = NCPoly::word({0, al}, I) + NCPoly::word({al, 0}, I) - NCPoly::word({be, ga}) +
                 NCPoly::word({ga, be});
    r.relations.push_back(p64);
    const cplx k = (r.K[be] - r.K[al]) / r.K[ga];
    const cplx lin = static_cast<double>(opt.nu_sign) * 2.0 * I / r.K[ga];
    NCPoly p65 = NCPoly::word({ga, 0}) - NCPoly::word({0, ga}) - NCPoly::word({al, be}, I * k) -
                 NCPoly::word({be, al}, I * k) - NCPoly::word({be}, lin * nu_tilde[al - 1] * r.rho[al]) +
                 NCPoly::word({al}, lin * nu_tilde[be - 1] * r.rho[be]);
    r.relations.push_back(p65);
  }
  return r;
}

IdealReducer::IdealReducer(const RelationSet& rel, int degree) : degree_(degree) {
  if (degree != 2 && degree != 3) throw std::invalid_argument("IdealReducer: degree must be 2 or 3");
  std::vector<NCPoly> span = rel.relations;
  if (degree == 3)
    for (const NCPoly& r : rel.relations)
      for (int b = 0; b < 4; ++b) {
        span.push_back(r * NCPoly::generator(b));
        span.push_back(NCPoly::generator(b) * r);
      }
  Mat A(word_space_dim(degree), static_cast<int>(span.size()));
  for (std::size_t k = 0; k < span.size(); ++k) {
    Vec v = to_vector(span[k], degree);
    A.col(static_cast<int>(k)) = v / v.norm();
  }
  auto svd = checked_svd(A, static_cast<int>(rel.relations.size()), "relation span");
  const auto& s = svd.singularValues();
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > kSingularCutoff * s(0)) ++rank_;
  basis_ = svd.matrixU().leftCols(rank_);
}

double IdealReducer::residual(const NCPoly& p) const {
  const Vec v = to_vector(p, degree_);
  const Vec r = v - basis_ * (basis_.adjoint() * v);
  return r.norm() / std::max(1.0, v.norm());
}

// ---------------------------------------------------------------------------

Mat R_pm(int sign, cplx z, cplx w, cplx hbar, const ModularPoint& m) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("R_pm: sign must be +1 or -1");
  const cplx x = z + static_cast<double>(sign) * w;
  check_regular(x, m.tau, "R_pm");
  Mat R = Mat::Zero(4, 4);
  for (int a = 0; a < 4; ++a) R += phi_eta_sigma(a, hbar / 2.0, x, m.tau) * kron(pauli(a), pauli(a));
  return R;
}

NCPoly QuantumLax::entry(int i, int j) const {
  NCPoly p;
  for (int a = 0; a < 4; ++a) {
    const cplx sa = pauli(a)(i, j);
    if (sa == cplx(0)) continue;
    p += NCPoly::word({a}, s[a] * sa) + NCPoly::constant(c[a] * sa);
  }
  return p;
}

QuantumLax quantum_lax(cplx hbar, const std::array<cplx, 3>& nu_tilde, cplx z, const ModularPoint& m, bool plus) {
  check_regular(z, m.tau, "quantum_lax");
  QuantumLax L;
  const double sg = plus ? -1.0 : 1.0;
  L.s[0] = phi(hbar, z, m);
  for (int a = 1; a <= 3; ++a) {
    const cplx za = z - sigma_half_period(a, m.tau);
    check_regular(za, m.tau, "quantum_lax");
    L.s[a] = sg * phi_eta_sigma(a, hbar, z, m.tau);
    L.c[a] = sg * nu_tilde[a - 1] * phi_eta_sigma(a, hbar, za, m.tau);
  }
  return L;
}

std::vector<NCPoly> reflection_difference(cplx z, cplx w, cplx hbar, const std::array<cplx, 3>& nu_tilde,
                                          const ModularPoint& m) {
  const MatPoly Rm = constant_mat(R_pm(-1, z, w, hbar, m));
  const MatPoly Rp = constant_mat(R_pm(+1, z, w, hbar, m));
  const MatPoly L1 = embed(quantum_lax(hbar, nu_tilde, z, m), 1);
  const MatPoly L2 = embed(quantum_lax(hbar, nu_tilde, w, m), 2);
  const MatPoly lhs = mat_product(mat_product(mat_product(Rm, L1), Rp), L2);
  const MatPoly rhs = mat_product(mat_product(mat_product(L2, Rp), L1), Rm);
  std::vector<NCPoly> out(16);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      NCPoly& p = out[4 * i + j];
      for (const auto& [wd, M] : lhs) p += NCPoly::word(wd, M(i, j));
      for (const auto& [wd, M] : rhs) p -= NCPoly::word(wd, M(i, j));
    }
  return out;
}

ReflectionReport reflection_residual(cplx z, cplx w, cplx hbar, const std::array<cplx, 3>& nu_tilde,
                                     const ModularPoint& m, const RelationOptions& opt) {
  const IdealReducer ideal(make_relations(hbar, nu_tilde, m, opt), 2);
  ReflectionReport rep;
  for (const NCPoly& p : reflection_difference(z, w, hbar, nu_tilde, m))
    rep.residual = std::max(rep.residual, ideal.residual(p));
  for (const char* id : {"gyro_channel_nunu", "gyro_channel_reduction", "gyro_channel_ss", "gyro_channel_nus"})
    rep.channel_chain = std::max(rep.channel_chain, residual(id, {z, w, hbar}, m.tau));
  return rep;
}

// ---------------------------------------------------------------------------

QuantumCasimirs quantum_casimirs(const RelationSet& rel) {
  QuantumCasimirs c;
  for (int a = 0; a < 4; ++a) c.c1 += NCPoly::word({a, a});
  for (auto [al, be, ga] : kCyclic) {
    const cplx K = rel.K[al];
    c.c2 += NCPoly::word({al, al}, K * (K - rel.K[be] - rel.K[ga]));
    c.c2 -= NCPoly::word({al}, 2.0 * rel.nu_tilde[al - 1] * rel.rho[al] * K);
  }
  return c;
}

double central_residual(const NCPoly& c, const IdealReducer& ideal) {
  double r = 0;
  for (int a = 0; a < 4; ++a) r = std::max(r, ideal.residual(commutator(c, NCPoly::generator(a))));
  return r;
}

CentralReport central_check(cplx hbar, const std::array<cplx, 3>& nu_tilde, const ModularPoint& m,
                            const RelationOptions& opt) {
  const RelationSet rel = make_relations(hbar, nu_tilde, m, opt);
  const IdealReducer ideal(rel, 3);
  const QuantumCasimirs cas = quantum_casimirs(rel);
  return {central_residual(cas.c1, ideal), central_residual(cas.c2, ideal), ideal.rank()};
}

QuantumDeterminant quantum_determinant(cplx z, cplx hbar, const std::array<cplx, 3>& nu_tilde,
                                       const ModularPoint& m, QdetForm form) {
  const QuantumLax A = quantum_lax(hbar, nu_tilde, z, m);
  const QuantumLax B = form == QdetForm::Mirror ? quantum_lax(hbar, nu_tilde, -z, m)
                                                : quantum_lax(-hbar, nu_tilde, z, m, true);
  const MatPoly prod = mat_product(embed(A, 1), embed(B, 2));
  Mat P = Mat::Zero(4, 4);
  for (int a = 0; a < 4; ++a) P += kron(pauli(a), pauli(a));
  QuantumDeterminant q;
  for (const auto& [wd, M] : prod) q.value += NCPoly::word(wd, (P * M).trace());

  const RelationSet rel = make_relations(hbar, nu_tilde, m);
  const QuantumCasimirs cas = quantum_casimirs(rel);
  std::vector<NCPoly> cols = rel.relations;
  cols.push_back(NCPoly::constant(1));
  cols.push_back(cas.c1);
  cols.push_back(cas.c2);
  Mat Bm(word_space_dim(2), static_cast<int>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) Bm.col(static_cast<int>(k)) = to_vector(cols[k], 2);
  auto svd = checked_svd(Bm, static_cast<int>(cols.size()), "determinant span");
  const Vec v = to_vector(q.value, 2);
  const Vec x = svd.solve(v);
  const int n = static_cast<int>(cols.size());
  q.unit = x(n - 3);
  q.c1 = x(n - 2);
  q.c2 = x(n - 1);
  q.residual = (Bm * x - v).norm() / std::max(1.0, v.norm());
  return q;
}

// ---------------------------------------------------------------------------

namespace {

// Classical brackets {S_i, S_j} read off the relations at one hbar, with S^_0 = hbar S0.
std::map<std::pair<int, int>, Polynomial> brackets_from_relations(const RelationSet& rel) {
  std::map<std::pair<int, int>, Polynomial> out;
  auto monomial = [](const Word& w) {
    Polynomial r = Polynomial::constant(4, 1);
    for (int g : w) r = r * Polynomial::variable(4, g);
    return r;
  };
  for (int k = 0; k < 3; ++k) {
    const auto [al, be, ga] = kCyclic[k];
    // b [S^_b, S^_g] = -(a S^_0 S^_a + a' S^_a S^_0)
    const NCPoly& p64 = rel.relations[2 * k];
    const cplx b = p64.coefficient({be, ga});
    const cplx s = -(p64.coefficient({0, al}) + p64.coefficient({al, 0})) / b;
    out[{be, ga}] = monomial({0, al}) * s;
    // c [S^_g, S^_0] + Q = 0  ->  {S0, S_g} = Q / (c hbar^2)
    const NCPoly& p65 = rel.relations[2 * k + 1];
    const cplx c = p65.coefficient({ga, 0});
    Polynomial q(4);
    for (const auto& [w, x] : p65.terms()) {
      if (w == Word{ga, 0} || w == Word{0, ga}) continue;
      q += monomial(w) * (x / (c * rel.hbar * rel.hbar));
    }
    out[{0, ga}] = q;
  }
  return out;
}

}  // namespace

double classical_limit_deviation(const std::array<cplx, 3>& nu_tilde, const ModularPoint& m,
                                 const RelationOptions& opt, cplx h1, cplx h2) {
  // Averages over +-h cancel the odd orders; one Richardson step in h^2 then
  // removes the h^2 term.
  auto even_part = [&](cplx h) {
    auto p = brackets_from_relations(make_relations(h, nu_tilde, m, opt));
    const auto q = brackets_from_relations(make_relations(-h, nu_tilde, m, opt));
    for (auto& [ij, poly] : p) poly = (poly + q.at(ij)) * 0.5;
    return p;
  };
  const auto b1 = even_part(h1);
  const auto b2 = even_part(h2);
  const cplx s1 = h1 * h1, s2 = h2 * h2;
  const BracketTable table = sklyanin_table(m, nu_prime_from_tilde(nu_tilde, m.tau));
  double worst = 0;
  for (const auto& [ij, p1] : b1) {
    const Polynomial extrap = (b2.at(ij) * s1 - p1 * s2) * (1.0 / (s1 - s2));
    const Polynomial& ref = table.entry(ij.first, ij.second);
    double scale = 1;
    for (const auto& [e_, c] : ref.terms()) scale = std::max(scale, std::abs(c));
    const Polynomial diff = extrap - ref;
    for (const auto& [e_, c] : diff.terms()) worst = std::max(worst, std::abs(c) / scale);
  }
  return worst;
}

}  // namespace ellwb
