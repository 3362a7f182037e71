#include "ellwb/poisson.hpp"

#include "ellwb/flows.hpp"

#include <algorithm>
#include <cmath>

namespace ellwb {

Polynomial Polynomial::constant(int nvars, cplx c) {
  Polynomial p(nvars);
  p.add_term(Exponents(nvars, 0), c);
  return p;
}

Polynomial Polynomial::variable(int nvars, int i) {
  if (i < 0 || i >= nvars) throw std::out_of_range("Polynomial::variable: index out of range");
  Polynomial p(nvars);
  Exponents e(nvars, 0);
  e[i] = 1;
  p.add_term(e, 1.0);
  return p;
}

void Polynomial::add_term(const Exponents& e, cplx c) {
  if (c == cplx(0.0)) return;
  auto it = t_.find(e);
  if (it == t_.end()) {
    t_.emplace(e, c);
    return;
  }
  it->second += c;
  if (it->second == cplx(0.0)) t_.erase(it);
}

void Polynomial::same_shape(const Polynomial& o) const {
  if (o.n_ != n_) throw std::invalid_argument("Polynomial: variable counts differ");
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  same_shape(o);
  for (const auto& [e, c] : o.t_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  same_shape(o);
  for (const auto& [e, c] : o.t_) add_term(e, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(cplx c) {
  if (c == cplx(0.0)) {
    t_.clear();
    return *this;
  }
  for (auto& kv : t_) kv.second *= c;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  a.same_shape(b);
  Polynomial out(a.n_);
  for (const auto& [ea, ca] : a.t_)
    for (const auto& [eb, cb] : b.t_) {
      Polynomial::Exponents e(ea);
      for (int i = 0; i < a.n_; ++i) e[i] += eb[i];
      out.add_term(e, ca * cb);
    }
  return out;
}

Polynomial Polynomial::derivative(int i) const {
  Polynomial out(n_);
  for (const auto& [e, c] : t_) {
    if (e[i] == 0) continue;
    Exponents d(e);
    --d[i];
    out.add_term(d, c * static_cast<double>(e[i]));
  }
  return out;
}

cplx Polynomial::operator()(const std::vector<cplx>& x) const {
  if (static_cast<int>(x.size()) != n_) throw std::invalid_argument("Polynomial: state has the wrong length");
  cplx s = 0;
  for (const auto& [e, c] : t_) {
    cplx m = c;
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < e[i]; ++k) m *= x[i];
    s += m;
  }
  return s;
}

// ---------------------------------------------------------------------------

const char* bracket_kind_name(BracketKind k) {
  switch (k) {
    case BracketKind::LinearSlN: return "linear_slN";
    case BracketKind::LinearSl2: return "linear_sl2";
    case BracketKind::Sklyanin: return "sklyanin_sl2";
    case BracketKind::SFO: return "SFO_slN";
    case BracketKind::Boundary: return "boundary";
    case BracketKind::Site: return "site";
    case BracketKind::Pencil: return "pencil";
  }
  return "?";
}

BracketTable::BracketTable(BracketKind kind, std::vector<std::string> generators)
    : kind_(kind), names_(std::move(generators)) {
  const int n = size();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j)
      if (names_[i] == names_[j]) throw SchemaError("BracketTable: duplicate generator " + names_[i]);
  b_.assign(static_cast<std::size_t>(n) * n, Polynomial(n));
}

int BracketTable::index(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw SchemaError("unknown generator '" + name + "' for table " + bracket_kind_name(kind_));
  return static_cast<int>(it - names_.begin());
}

Polynomial BracketTable::variable(const std::string& name) const { return Polynomial::variable(size(), index(name)); }

void BracketTable::set(int i, int j, const Polynomial& p) {
  if (i == j) throw std::invalid_argument("BracketTable::set: diagonal entries are zero");
  if (p.nvars() != size()) throw SchemaError("BracketTable::set: polynomial over the wrong generators");
  b_[i * size() + j] = p;
  b_[j * size() + i] = p * cplx(-1.0);
}

cplx BracketTable::bracket(int i, int j, const std::vector<cplx>& state) const { return entry(i, j)(state); }

cplx bracket_of_functions(const BracketTable& t, const Polynomial& F, const Polynomial& G,
                          const std::vector<cplx>& state) {
  const int n = t.size();
  if (F.nvars() != n || G.nvars() != n)
    throw SchemaError("bracket_of_functions: observable is not a polynomial in the table's generators");
  if (static_cast<int>(state.size()) != n) throw SchemaError("bracket_of_functions: state has the wrong length");
  std::vector<cplx> df(n), dg(n);
  for (int i = 0; i < n; ++i) {
    df[i] = F.derivative(i)(state);
    dg[i] = G.derivative(i)(state);
  }
  cplx s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (df[i] != cplx(0.0) && dg[j] != cplx(0.0)) s += df[i] * dg[j] * t.bracket(i, j, state);
  return s;
}

double jacobi_residual(const BracketTable& t, const std::vector<cplx>& state) {
  const int n = t.size();
  if (static_cast<int>(state.size()) != n) throw SchemaError("jacobi_residual: state has the wrong length");
  std::vector<cplx> b(n * n);
  std::vector<std::vector<cplx>> db(n * n, std::vector<cplx>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      b[i * n + j] = t.bracket(i, j, state);
      for (int l = 0; l < n; ++l) db[i * n + j][l] = t.entry(i, j).derivative(l)(state);
    }
  // {x_i, B_jk} = sum_l B_il d_l B_jk
  auto outer = [&](int i, int j, int k) {
    cplx s = 0;
    for (int l = 0; l < n; ++l) s += b[i * n + l] * db[j * n + k][l];
    return s;
  };
  double r = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) r = std::max(r, std::abs(outer(i, j, k) + outer(j, k, i) + outer(k, i, j)));
  return r;
}

namespace {

// Re-express p over the generators of `to`; p's generators must all be present.
Polynomial relabel(const Polynomial& p, const BracketTable& from, const BracketTable& to) {
  std::vector<int> map(from.size());
  for (int i = 0; i < from.size(); ++i) map[i] = to.index(from.generators()[i]);
  Polynomial out(to.size());
  for (const auto& [e, c] : p.terms()) {
    Polynomial m = Polynomial::constant(to.size(), c);
    for (int i = 0; i < from.size(); ++i)
      for (int k = 0; k < e[i]; ++k) m = m * Polynomial::variable(to.size(), map[i]);
    out += m;
  }
  return out;
}

}  // namespace

BracketTable pencil(const BracketTable& a, const BracketTable& b, cplx lambda) {
  std::vector<std::string> names = a.generators();
  for (const auto& g : b.generators())
    if (std::find(names.begin(), names.end(), g) == names.end()) names.push_back(g);
  BracketTable out(BracketKind::Pencil, names);
  const int n = out.size();
  std::vector<Polynomial> acc(n * n, Polynomial(n));
  for (int i = 0; i < a.size(); ++i)
    for (int j = 0; j < a.size(); ++j)
      acc[out.index(a.generators()[i]) * n + out.index(a.generators()[j])] += relabel(a.entry(i, j), a, out);
  for (int i = 0; i < b.size(); ++i)
    for (int j = 0; j < b.size(); ++j)
      acc[out.index(b.generators()[i]) * n + out.index(b.generators()[j])] += relabel(b.entry(i, j), b, out) * lambda;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.set(i, j, acc[i * n + j]);
  return out;
}

BracketTable renamed(const BracketTable& t, const std::string& suffix) {
  std::vector<std::string> names;
  for (const auto& g : t.generators()) names.push_back(g + suffix);
  BracketTable out(t.kind(), names);
  for (int i = 0; i < t.size(); ++i)
    for (int j = i + 1; j < t.size(); ++j) out.set(i, j, t.entry(i, j));
  return out;
}

BracketTable direct_sum(const BracketTable& a, const BracketTable& b) {
  for (const auto& g : b.generators())
    if (std::find(a.generators().begin(), a.generators().end(), g) != a.generators().end())
      throw SchemaError("direct_sum: generator " + g + " appears in both tables");
  BracketTable s = pencil(a, b, 1.0);
  BracketTable out(a.kind(), s.generators());
  for (int i = 0; i < s.size(); ++i)
    for (int j = i + 1; j < s.size(); ++j) out.set(i, j, s.entry(i, j));
  return out;
}

// ---------------------------------------------------------------------------

double structure_constants(const LatticeIndex& a, const LatticeIndex& b) { return structure_constant(a, b); }

namespace {

std::string sln_name(const LatticeIndex& g) {
  return "S[" + std::to_string(g.a1) + "," + std::to_string(g.a2) + "]";
}

// Position of a nonzero index in sl_basis_indices order.
int basis_position(const LatticeIndex& g) {
  const auto c = g.canonical();
  return c.a1 * c.N + c.a2 - 1;
}

// Coefficient of the literal representative: S_lit = S_can e_N(c1 c2 / 2) / e_N(l1 l2 / 2),
// because T with the literal representative is e_N(l1 l2 / 2) / e_N(c1 c2 / 2) times T_can.
cplx literal_factor(const LatticeIndex& l) {
  const auto c = l.canonical();
  return e_N(0.5 * c.a1 * c.a2, l.N) / e_N(0.5 * l.a1 * l.a2, l.N);
}

// S_l as a polynomial, with offset = position of the first sl(N) generator.
Polynomial s_of(const LatticeIndex& l, int nvars, int offset) {
  return Polynomial::variable(nvars, offset + basis_position(l)) * literal_factor(l);
}

std::vector<std::string> sln_names(int N, bool with_s0) {
  std::vector<std::string> names;
  if (with_s0) names.push_back("S0");
  for (const auto& g : sl_basis_indices(N)) names.push_back(sln_name(g));
  return names;
}

void require_rank(int N) {
  if (N < 2) throw std::invalid_argument("sl(N) tables need N >= 2");
}

}  // namespace

BracketTable linear_sln_table(int N) {
  require_rank(N);
  BracketTable t(BracketKind::LinearSlN, sln_names(N, false));
  const auto idx = sl_basis_indices(N);
  const int n = t.size();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const LatticeIndex c = idx[i] + idx[j];
      if (c.is_zero()) continue;
      t.set(i, j, s_of(c, n, 0) * cplx(structure_constant(idx[i], idx[j])));
    }
  return t;
}

namespace {

const int kEps[3][3][3] = {{{0, 0, 0}, {0, 0, 1}, {0, -1, 0}},
                           {{0, 0, -1}, {0, 0, 0}, {1, 0, 0}},
                           {{0, 1, 0}, {-1, 0, 0}, {0, 0, 0}}};

std::vector<std::string> gyro_names() { return {"S0", "S1", "S2", "S3"}; }

// Sklyanin-type table on (S0, S1, S2, S3) with {S_a, S_b} = 2i s eps S0 S_c and
// {S0, S_a} = s (i eps S_b S_c (J_b - J_c) + 2i eps S_b nu'_c).
BracketTable gyro_table(BracketKind kind, double s, const ModularPoint& m, const std::array<cplx, 3>& np) {
  BracketTable t(kind, gyro_names());
  auto x = [&](int i) { return Polynomial::variable(4, i); };
  const cplx i2(0.0, 2.0 * s);
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      const int c = 3 - a - b;
      t.set(a + 1, b + 1, x(0) * x(c + 1) * (i2 * static_cast<double>(kEps[a][b][c])));
    }
  for (int a = 0; a < 3; ++a) {
    Polynomial p(4);
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) {
        if (kEps[a][b][c] == 0) continue;
        const double ep = kEps[a][b][c];
        p += x(b + 1) * x(c + 1) * (cplx(0.0, s * ep) * (m.e_sigma(b + 1) - m.e_sigma(c + 1)));
        p += x(b + 1) * (i2 * ep * np[c]);
      }
    t.set(0, a + 1, p);
  }
  return t;
}

}  // namespace

BracketTable linear_sl2_table() {
  BracketTable t(BracketKind::LinearSl2, {"S1", "S2", "S3"});
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      const int c = 3 - a - b;
      t.set(a, b, Polynomial::variable(3, c) * cplx(0.0, 2.0 * kEps[a][b][c]));
    }
  return t;
}

BracketTable sklyanin_table(const ModularPoint& m, const std::array<cplx, 3>& nu_prime) {
  return gyro_table(BracketKind::Sklyanin, 1.0, m, nu_prime);
}

BracketTable boundary_table(const ModularPoint& m, const std::array<cplx, 3>& nu_prime) {
  return gyro_table(BracketKind::Boundary, 2.0, m, nu_prime);
}

BracketTable site_table(const ModularPoint& m, int sites) {
  if (sites < 1) throw std::invalid_argument("site_table: at least one site");
  std::vector<std::string> names;
  for (int k = 1; k <= sites; ++k)
    for (const auto& g : gyro_names()) names.push_back(g + "^" + std::to_string(k));
  BracketTable t(BracketKind::Site, names);
  const BracketTable one = gyro_table(BracketKind::Site, 1.0, m, {});
  const int n = t.size();
  for (int k = 0; k < sites; ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        Polynomial p(n);
        for (const auto& [e, c] : one.entry(i, j).terms()) {
          Polynomial mono = Polynomial::constant(n, c);
          for (int v = 0; v < 4; ++v)
            for (int r = 0; r < e[v]; ++r) mono = mono * Polynomial::variable(n, 4 * k + v);
          p += mono;
        }
        t.set(4 * k + i, 4 * k + j, p);
      }
  return t;
}

// The displayed coordinate form with the normalisation fixed by the exchange relation
// for L~ = -S0 Id + sum S_a varphi_a T_a:  with t = N / 2 pi i,
//   {S_a, S_b} = -C(a, b) S0 S_{a+b} - (t/2) sum_g S_{a-g} S_{b+g} f(a, b, g) C(g, a-b)
//   {S_a, S0}  = -(t^2/2) sum_g S_{a-g} S_g (E2(g) - E2(a-g)) C(a, g)
// Index arithmetic is literal; S at a literal index carries the T phase.
BracketTable sfo_table(int N, const ModularPoint& m) {
  require_rank(N);
  BracketTable t(BracketKind::SFO, sln_names(N, true));
  const auto idx = sl_basis_indices(N);
  const int n = t.size();
  const cplx tn = static_cast<double>(N) / two_pi_i;
  const Polynomial s0 = Polynomial::variable(n, 0);
  auto S = [&](const LatticeIndex& l) { return s_of(l, n, 1); };
  auto E1p = [&](const LatticeIndex& l) { return E1(lattice_point(l, m.tau), m.tau); };
  auto E2p = [&](const LatticeIndex& l) { return E2(lattice_point(l, m.tau), m.tau); };

  for (std::size_t i = 0; i < idx.size(); ++i) {
    const LatticeIndex& a = idx[i];
    Polynomial p(n);
    for (const auto& g : idx) {
      const LatticeIndex d = a + (-g);
      if (d.is_zero()) continue;
      p += S(d) * S(g) * ((E2p(g) - E2p(d)) * structure_constant(a, g));
    }
    t.set(static_cast<int>(i) + 1, 0, p * (-0.5 * tn * tn));

    for (std::size_t j = i + 1; j < idx.size(); ++j) {
      const LatticeIndex& b = idx[j];
      Polynomial q(n);
      const LatticeIndex amb = a + (-b);
      for (const auto& g : idx) {
        const LatticeIndex d = a + (-g), h = b + g;
        if (d.is_zero() || h.is_zero()) continue;
        const double c = structure_constant(g, amb);
        if (std::abs(c) < 1e-12) continue;
        const cplx f = E1p(g) + E1p(h + (-a)) - E1p(h) + E1p(d);
        q += S(d) * S(h) * (f * c);
      }
      q *= -0.5 * tn;
      const LatticeIndex ab = a + b;
      if (!ab.is_zero()) q -= s0 * S(ab) * cplx(structure_constant(a, b));
      t.set(static_cast<int>(i) + 1, static_cast<int>(j) + 1, q);
    }
  }
  return t;
}

SklyaninCasimirs sklyanin_casimirs(const BracketTable& t, const ModularPoint& m, const std::array<cplx, 3>& np) {
  const Polynomial s0 = t.variable("S0");
  SklyaninCasimirs c{Polynomial(t.size()), s0 * s0};
  for (int a = 1; a <= 3; ++a) {
    const Polynomial s = t.variable("S" + std::to_string(a));
    c.c1 += s * s;
    c.c2 += s * s * wp(m.omega[kSigmaToOmega[a]], m.tau) + s * (-2.0 * np[a - 1]);
  }
  return c;
}

// ---------------------------------------------------------------------------

namespace {

// T with the literal representative l: no reduction of (l1, l2) modulo N in the phase.
Mat t_literal(const LatticeIndex& l) {
  const auto c = l.canonical();
  return t_matrix(l) * (e_N(0.5 * l.a1 * l.a2, l.N) / e_N(0.5 * c.a1 * c.a2, l.N));
}

}  // namespace

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat r_residue(int N) {
  Mat out = Mat::Zero(N * N, N * N);
  for (const auto& g : sl_basis_indices(N)) out += kron(t_matrix(g), t_literal(-g));
  return out;
}

Mat r_matrix(cplx z, cplx w, const ModularPoint& m, int N) {
  require_rank(N);
  check_regular(z - w, m.tau, "r_matrix");
  Mat out = Mat::Zero(N * N, N * N);
  for (const auto& g : sl_basis_indices(N)) out += varphi(g, z - w, m.tau) * kron(t_matrix(g), t_literal(-g));
  return out;
}

Mat reflection_r(cplx z, cplx w, const ModularPoint& m, int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("reflection_r: sign must be +1 or -1");
  const cplx x = z + static_cast<double>(sign) * w;
  check_regular(x, m.tau, "reflection_r");
  Mat out = Mat::Zero(4, 4);
  for (int a = 1; a <= 3; ++a) out += varphi_sigma(a, x, m.tau) * kron(pauli(a), pauli(a));
  return out;
}

double cybe_residual(cplx w, cplx wp_, const ModularPoint& m, int N) {
  const Mat id = Mat::Identity(N, N);
  Mat r12 = Mat::Zero(N * N * N, N * N * N), r13 = r12, r23 = r12;
  // P23 conjugation places the second factor of r in slot 3.
  Mat p23 = Mat::Zero(N * N * N, N * N * N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) p23(i * N * N + k * N + j, i * N * N + j * N + k) = 1.0;
  for (const auto& g : sl_basis_indices(N)) {
    const Mat a = t_matrix(g), b = t_literal(-g);
    r12 += varphi(g, w - wp_, m.tau) * kron(kron(a, b), id);
    r13 += varphi(g, w, m.tau) * (p23 * kron(kron(a, b), id) * p23);
    r23 += varphi(g, wp_, m.tau) * kron(id, kron(a, b));
  }
  auto com = [](const Mat& x, const Mat& y) { return Mat(x * y - y * x); };
  return max_abs(com(r12, r13) + com(r12, r23) + com(r13, r23));
}

// ---------------------------------------------------------------------------

namespace {

double relative(const Mat& lhs, const Mat& rhs) { return max_abs(lhs - rhs) / std::max(1.0, max_abs(rhs)); }

// sum_ij B_ij(x) dL/dx_i (z) (x) dL/dx_j (w)
Mat assemble(const BracketTable& t, const std::vector<cplx>& x, const std::vector<Mat>& dz, const std::vector<Mat>& dw) {
  const int n = t.size();
  const int d = static_cast<int>(dz[0].rows());
  Mat out = Mat::Zero(d * d, d * d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cplx b = t.bracket(i, j, x);
      if (b != cplx(0.0)) out += b * kron(dz[i], dw[j]);
    }
  return out;
}

std::vector<Mat> sln_partials(int N, cplx z, const ModularPoint& m, bool with_s0) {
  std::vector<Mat> d;
  if (with_s0) d.push_back(-Mat::Identity(N, N));
  for (const auto& g : sl_basis_indices(N)) d.push_back(varphi(g, z, m.tau) * t_matrix(g));
  return d;
}

Mat sln_lax(const std::vector<cplx>& S, int N, cplx z, const ModularPoint& m) {
  Mat out = Mat::Zero(N, N);
  const auto idx = sl_basis_indices(N);
  for (std::size_t i = 0; i < idx.size(); ++i) out += S[i] * varphi(idx[i], z, m.tau) * t_matrix(idx[i]);
  return out;
}

int rank_from_size(std::size_t n) {
  const int N = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n + 1))));
  if (N < 2 || static_cast<std::size_t>(N * N - 1) != n) throw std::invalid_argument("expected N^2 - 1 coefficients");
  return N;
}

std::vector<Mat> gyro_partials(cplx z, const ModularPoint& m, bool with_s0) {
  std::vector<Mat> d;
  if (with_s0) d.push_back(pauli(0));
  for (int a = 1; a <= 3; ++a) d.push_back(varphi_sigma(a, z, m.tau) * pauli(a));
  return d;
}

}  // namespace

double linear_rmatrix_check(const std::vector<cplx>& S, cplx z, cplx w, const ModularPoint& m) {
  const int N = rank_from_size(S.size());
  const Mat id = Mat::Identity(N, N);
  const Mat lhs = assemble(linear_sln_table(N), S, sln_partials(N, z, m, false), sln_partials(N, w, m, false));
  const Mat r = r_matrix(z, w, m, N);
  const Mat l = kron(sln_lax(S, N, z, m), id) + kron(id, sln_lax(S, N, w, m));
  return relative(lhs, r * l - l * r);
}

double quadratic_exchange_check(cplx S0, const std::vector<cplx>& S, cplx z, cplx w, const ModularPoint& m) {
  const int N = rank_from_size(S.size());
  const Mat id = Mat::Identity(N, N);
  std::vector<cplx> x{S0};
  x.insert(x.end(), S.begin(), S.end());
  const Mat lhs = assemble(sfo_table(N, m), x, sln_partials(N, z, m, true), sln_partials(N, w, m, true));
  const Mat r = r_matrix(z, w, m, N);
  const Mat l = kron(sln_lax(S, N, z, m) - S0 * id, id) * kron(id, sln_lax(S, N, w, m) - S0 * id);
  return relative(lhs, r * l - l * r);
}

Mat gyro_lax_tilde(const GyroState& g, const ModularPoint& m, cplx z, bool with_s0) {
  Mat out = with_s0 ? Mat(g.S0 * pauli(0)) : Mat(Mat::Zero(2, 2));
  for (int a = 1; a <= 3; ++a) {
    cplx c = g.S[a - 1] * varphi_sigma(a, z, m.tau);
    if (g.nu_tilde[a] != cplx(0.0))
      c += g.nu_tilde[a] * varphi_sigma(a, z - m.omega[kSigmaToOmega[a]], m.tau);
    out += c * pauli(a);
  }
  return out;
}

namespace {

struct ReflectionPieces {
  Mat quad_lhs, lin_lhs, L1, L2, l1, l2, rm, rp;
};

ReflectionPieces reflection_pieces(const GyroState& g, cplx z, cplx w, const ModularPoint& m) {
  ReflectionPieces p;
  const Mat id = Mat::Identity(2, 2);
  const std::vector<cplx> x{g.S0, g.S[0], g.S[1], g.S[2]};
  p.quad_lhs = assemble(sklyanin_table(m, g.nu_prime), x, gyro_partials(z, m, true), gyro_partials(w, m, true));
  p.lin_lhs = assemble(linear_sl2_table(), {g.S[0], g.S[1], g.S[2]}, gyro_partials(z, m, false),
                       gyro_partials(w, m, false));
  p.L1 = kron(gyro_lax_tilde(g, m, z), id);
  p.L2 = kron(id, gyro_lax_tilde(g, m, w));
  p.l1 = kron(gyro_lax_tilde(g, m, z, false), id);
  p.l2 = kron(id, gyro_lax_tilde(g, m, w, false));
  p.rm = reflection_r(z, w, m, -1);
  p.rp = reflection_r(z, w, m, 1);
  return p;
}

}  // namespace

ReflectionResiduals reflection_bracket_check(const GyroState& g, cplx z, cplx w, const ModularPoint& m) {
  const auto p = reflection_pieces(g, z, w, m);
  const Mat ll = p.L1 * p.L2;
  const Mat quad = 0.5 * (ll * p.rm - p.rm * ll) + 0.5 * p.L2 * p.rp * p.L1 - 0.5 * p.L1 * p.rp * p.L2;
  const Mat s = p.l1 + p.l2, d = p.l1 - p.l2;
  const Mat lin = -0.5 * (p.rm * s - s * p.rm) + 0.5 * (p.rp * d - d * p.rp);
  return {relative(p.quad_lhs, quad), relative(p.lin_lhs, lin)};
}

ReflectionResiduals unreduced_reflection_check(const GyroState& g, cplx z, cplx w, const ModularPoint& m) {
  const auto p = reflection_pieces(g, z, w, m);
  const Mat ll = p.L1 * p.L2, s = p.l1 + p.l2;
  return {relative(p.quad_lhs, ll * p.rm - p.rm * ll), relative(p.lin_lhs, s * p.rm - p.rm * s)};
}

BihamiltonianResiduals bihamiltonian_check(const GyroState& g, const ModularPoint& m, const std::vector<cplx>& lambdas) {
  BihamiltonianResiduals r;
  const BracketTable t2 = sklyanin_table(m, g.nu_prime);
  const std::vector<cplx> x{g.S0, g.S[0], g.S[1], g.S[2]};
  std::array<cplx, 3> J{m.e_sigma(1), m.e_sigma(2), m.e_sigma(3)};
  const auto v = zvg_velocity(g.S, J, g.nu_prime);
  double scale = 1;
  for (int a = 0; a < 3; ++a) {
    r.flow = std::max(r.flow, std::abs(t2.bracket(0, a + 1, x) - v[a]));
    scale = std::max(scale, std::abs(v[a]));
  }
  r.flow /= scale;
  const BracketTable t1 = linear_sl2_table();
  for (const cplx& l : lambdas) r.pencil = std::max(r.pencil, jacobi_residual(pencil(t2, t1, l), x));
  return r;
}

double top_bihamiltonian_check(const std::vector<cplx>& S, int N, const ModularPoint& m) {
  if (static_cast<int>(S.size()) != N * N - 1) throw std::invalid_argument("top_bihamiltonian_check: size mismatch");
  const BracketTable t = sfo_table(N, m);
  std::vector<cplx> x{0.0};
  x.insert(x.end(), S.begin(), S.end());
  const cplx tn = static_cast<double>(N) / two_pi_i;
  auto v = top_velocity(S, N, m.tau);
  for (auto& c : v) c *= tn * tn;
  double r = 0, scale = 1;
  for (int a = 0; a < N * N - 1; ++a) {
    r = std::max(r, std::abs(t.bracket(0, a + 1, x) - v[a]));
    scale = std::max(scale, std::abs(v[a]));
  }
  return r / scale;
}

}  // namespace ellwb
