#pragma once
// Truncated multivariate Taylor polynomials (forward-mode jets).
//
// A Jet<NV,K> holds the Taylor coefficients of a function of NV variables
// up to total degree K around a base point.  Arithmetic propagates the
// truncated expansion exactly, so partial derivatives of any composite
// expression up to order K come out without step-size error.

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

namespace ellwb {

using cplx = std::complex<double>;

namespace detail {

constexpr int binom(int n, int k) {
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<int>(r);
}

template <int NV, int K>
struct JetTables {
  std::vector<std::array<int, NV>> exps;
  std::vector<int> degree;
  // (a, b, c): coefficient c += x[a] * y[b]
  std::vector<std::array<int, 3>> mul;

  JetTables() {
    std::array<int, NV> e{};
    for (int d = 0; d <= K; ++d) enumerate(0, d, e);
    const int n = static_cast<int>(exps.size());
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        if (degree[a] + degree[b] > K) continue;
        std::array<int, NV> s{};
        for (int v = 0; v < NV; ++v) s[v] = exps[a][v] + exps[b][v];
        mul.push_back({a, b, find(s)});
      }
  }

  int find(const std::array<int, NV>& s) const {
    for (std::size_t i = 0; i < exps.size(); ++i)
      if (exps[i] == s) return static_cast<int>(i);
    return -1;
  }

 private:
  void enumerate(int v, int left, std::array<int, NV>& e) {
    if (v == NV - 1) {
      e[v] = left;
      exps.push_back(e);
      int d = 0;
      for (int x : e) d += x;
      degree.push_back(d);
      return;
    }
    for (int i = left; i >= 0; --i) {
      e[v] = i;
      enumerate(v + 1, left - i, e);
    }
  }
};

}  // namespace detail

template <int NV, int K>
class Jet {
 public:
  static constexpr int nvars = NV;
  static constexpr int order = K;
  static constexpr int size = detail::binom(NV + K, K);

  std::array<cplx, size> c{};

  Jet() = default;
  Jet(cplx v) { c[0] = v; }  // NOLINT: implicit constant promotion
  Jet(double v) { c[0] = v; }

  static Jet variable(int i, cplx v) {
    Jet j(v);
    if (K >= 1) j.c[1 + i] = 1.0;
    return j;
  }

  static const detail::JetTables<NV, K>& tables() {
    static const detail::JetTables<NV, K> t;
    return t;
  }

  cplx value() const { return c[0]; }

  // Partial derivative with the given multi-index (not the Taylor coefficient).
  cplx deriv(const std::array<int, NV>& e) const {
    int i = tables().find(e);
    if (i < 0) return 0.0;
    double f = 1;
    for (int v = 0; v < NV; ++v)
      for (int k = 2; k <= e[v]; ++k) f *= k;
    return c[i] * f;
  }
  cplx d(int v) const {
    std::array<int, NV> e{};
    e[v] = 1;
    return deriv(e);
  }

  Jet& operator+=(const Jet& o) {
    for (int i = 0; i < size; ++i) c[i] += o.c[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int i = 0; i < size; ++i) c[i] -= o.c[i];
    return *this;
  }
  Jet& operator*=(cplx s) {
    for (auto& x : c) x *= s;
    return *this;
  }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }
  Jet operator-() const {
    Jet r = *this;
    for (auto& x : r.c) x = -x;
    return r;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (const auto& m : tables().mul) r.c[m[2]] += a.c[m[0]] * b.c[m[1]];
    return r;
  }
  friend Jet operator*(Jet a, cplx s) { return a *= s; }
  friend Jet operator*(cplx s, Jet a) { return a *= s; }
  friend Jet operator*(Jet a, double s) { return a *= cplx(s); }
  friend Jet operator*(double s, Jet a) { return a *= cplx(s); }
  friend Jet operator+(Jet a, cplx s) { a.c[0] += s; return a; }
  friend Jet operator+(cplx s, Jet a) { a.c[0] += s; return a; }
  friend Jet operator-(Jet a, cplx s) { a.c[0] -= s; return a; }
  friend Jet operator-(cplx s, const Jet& a) { return (-a) + s; }
  friend Jet operator+(Jet a, double s) { a.c[0] += s; return a; }
  friend Jet operator+(double s, Jet a) { a.c[0] += s; return a; }
  friend Jet operator-(Jet a, double s) { a.c[0] -= s; return a; }
  friend Jet operator-(double s, const Jet& a) { return (-a) + s; }
  friend Jet operator/(Jet a, double s) { return a *= cplx(1.0 / s); }
  friend Jet operator/(Jet a, cplx s) { return a *= (1.0 / s); }
  friend Jet operator/(const Jet& a, const Jet& b) { return a * b.recip(); }
  friend Jet operator/(cplx s, const Jet& b) { return b.recip() * s; }
  friend Jet operator/(double s, const Jet& b) { return b.recip() * cplx(s); }

  Jet recip() const {
    const cplx x0 = c[0];
    std::array<cplx, K + 1> d{};
    cplx p = 1.0 / x0;
    for (int n = 0; n <= K; ++n) {
      d[n] = p;  // n-th derivative / n!  of 1/x at x0 is (-1)^n / x0^(n+1)
      p *= -1.0 / x0;
    }
    return compose_taylor(d);
  }

  // f(*this) given Taylor coefficients t[n] = f^(n)(x0)/n!.
  template <std::size_t M>
  Jet compose_taylor(const std::array<cplx, M>& t) const {
    Jet delta = *this;
    delta.c[0] = 0.0;
    Jet r(t[0]);
    Jet pw(1.0);
    for (int n = 1; n <= K && n < static_cast<int>(M); ++n) {
      pw = pw * delta;
      r += pw * t[n];
    }
    return r;
  }
};

template <int NV, int K>
Jet<NV, K> exp(const Jet<NV, K>& x) {
  std::array<cplx, K + 1> t{};
  const cplx e0 = std::exp(x.c[0]);
  double f = 1;
  for (int n = 0; n <= K; ++n) {
    if (n > 0) f *= n;
    t[n] = e0 / f;
  }
  return x.compose_taylor(t);
}

template <int NV, int K>
Jet<NV, K> log(const Jet<NV, K>& x) {
  std::array<cplx, K + 1> t{};
  t[0] = std::log(x.c[0]);
  cplx p = 1.0 / x.c[0];
  for (int n = 1; n <= K; ++n) {
    t[n] = p * ((n % 2) ? 1.0 : -1.0) / static_cast<double>(n);
    p /= x.c[0];
  }
  return x.compose_taylor(t);
}

template <int NV, int K>
Jet<NV, K> sqrt(const Jet<NV, K>& x) {
  std::array<cplx, K + 1> t{};
  const cplx s = std::sqrt(x.c[0]);
  cplx coef = 1.0;  // binomial(1/2, n)
  cplx p = s;
  for (int n = 0; n <= K; ++n) {
    t[n] = coef * p;
    coef *= (0.5 - n) / (n + 1.0);
    p /= x.c[0];
  }
  return x.compose_taylor(t);
}

template <class T>
struct is_jet : std::false_type {};
template <int NV, int K>
struct is_jet<Jet<NV, K>> : std::true_type {};
template <class T>
inline constexpr bool is_jet_v = is_jet<T>::value;

inline cplx value_of(cplx x) { return x; }
template <int NV, int K>
cplx value_of(const Jet<NV, K>& x) { return x.value(); }

}  // namespace ellwb
