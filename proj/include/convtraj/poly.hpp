#pragma once
/**
 * Sparse multivariate polynomials over doubles.
 *
 * Terms are kept in a map ordered lexicographically by exponent vector, so
 * evaluation order and text output are deterministic. Arithmetic results are
 * normalized by dropping coefficients with |c| < 1e-14.
 *
 * Variable indices are 0-based throughout the C++ API; the text syntax uses
 * x1..xn (with x, y, z, w as aliases for the first four).
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "convtraj/error.hpp"

namespace convtraj {

inline constexpr double kDropCoefficient = 1e-14;

using Exponent = std::vector<int>;

struct Monomial {
  Exponent exponents;
  double coefficient = 0.0;
};

namespace detail {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double int_pow(double base, int e) {
  double r = 1.0;
  while (e > 0) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

}  // namespace detail

class Polynomial {
 public:
  using TermMap = std::map<Exponent, double>;

  Polynomial() = default;
  explicit Polynomial(int dimension) : dim_(dimension) {
    if (dimension < 0) throw bad_input("polynomial dimension must be nonnegative");
  }

  static Polynomial constant(int dimension, double c) {
    Polynomial p(dimension);
    p.add_term(Exponent(static_cast<std::size_t>(dimension), 0), c);
    return p;
  }

  static Polynomial variable(int dimension, int j) {
    if (j < 0 || j >= dimension) throw bad_input("variable index out of range");
    Polynomial p(dimension);
    Exponent e(static_cast<std::size_t>(dimension), 0);
    e[static_cast<std::size_t>(j)] = 1;
    p.add_term(std::move(e), 1.0);
    return p;
  }

  int dimension() const { return dim_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  std::vector<Monomial> monomials() const {
    std::vector<Monomial> out;
    out.reserve(terms_.size());
    for (const auto& [e, c] : terms_) out.push_back({e, c});
    return out;
  }

  int degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) {
      int s = 0;
      for (int v : e) s += v;
      d = std::max(d, s);
    }
    return is_zero() ? -1 : d;
  }

  double max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

  // Coefficient of the given exponent, 0 when absent.
  double coefficient(const Exponent& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? 0.0 : it->second;
  }

  Polynomial& add_term(Exponent e, double c) {
    if (static_cast<int>(e.size()) != dim_) throw bad_input("exponent length does not match dimension");
    for (int v : e) {
      if (v < 0) throw bad_input("negative exponent");
    }
    auto [it, inserted] = terms_.try_emplace(std::move(e), c);
    if (!inserted) it->second += c;
    if (std::abs(it->second) < kDropCoefficient) terms_.erase(it);
    return *this;
  }

  // Drops coefficients below the given threshold; idempotent.
  Polynomial& normalize(double threshold = kDropCoefficient) {
    std::erase_if(terms_, [threshold](const auto& kv) { return std::abs(kv.second) < threshold; });
    return *this;
  }

  double evaluate(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_) throw bad_input("evaluate: dimension mismatch");
    detail::CompensatedSum acc;
    for (const auto& [e, c] : terms_) {
      double t = c;
      for (std::size_t j = 0; j < e.size(); ++j) {
        if (e[j] != 0) t *= detail::int_pow(x[j], e[j]);
      }
      acc.add(t);
    }
    return acc.value();
  }

  double evaluate(const Eigen::VectorXd& x) const {
    return evaluate(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  }

  Polynomial partial_derivative(int j) const {
    if (j < 0 || j >= dim_) throw bad_input("partial_derivative: variable index out of range");
    Polynomial out(dim_);
    for (const auto& [e, c] : terms_) {
      const int k = e[static_cast<std::size_t>(j)];
      if (k == 0) continue;
      Exponent d = e;
      d[static_cast<std::size_t>(j)] = k - 1;
      out.add_term(std::move(d), c * k);
    }
    return out;
  }

  Polynomial operator-() const {
    Polynomial out = *this;
    for (auto& [e, c] : out.terms_) c = -c;
    return out;
  }

  Polynomial& operator+=(const Polynomial& o) {
    check_same(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }

  Polynomial& operator-=(const Polynomial& o) {
    check_same(o);
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }

  Polynomial& operator*=(double s) {
    for (auto& [e, c] : terms_) c *= s;
    return normalize();
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check_same(b);
    std::map<Exponent, detail::CompensatedSum> acc;
    Exponent e(static_cast<std::size_t>(a.dim_), 0);
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        for (std::size_t j = 0; j < e.size(); ++j) e[j] = ea[j] + eb[j];
        acc[e].add(ca * cb);
      }
    }
    Polynomial out(a.dim_);
    for (auto& [ex, s] : acc) {
      const double v = s.value();
      if (std::abs(v) >= kDropCoefficient) out.terms_.emplace(ex, v);
    }
    return out;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.dim_ == b.dim_ && a.terms_ == b.terms_;
  }

  /// Canonical text form, parseable by parse_polynomial. Uses x1..xn names.
  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    // Highest total degree first reads more naturally; ties keep map order.
    std::vector<std::pair<Exponent, double>> ordered(terms_.begin(), terms_.end());
    std::stable_sort(ordered.begin(), ordered.end(), [](const auto& l, const auto& r) {
      int dl = 0, dr = 0;
      for (int v : l.first) dl += v;
      for (int v : r.first) dr += v;
      return dl > dr;
    });
    for (const auto& [e, c] : ordered) {
      const bool neg = c < 0;
      if (first) {
        if (neg) os << "-";
      } else {
        os << (neg ? " - " : " + ");
      }
      first = false;
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", std::abs(c));
      os << buf;
      for (std::size_t j = 0; j < e.size(); ++j) {
        if (e[j] == 0) continue;
        os << "*x" << (j + 1);
        if (e[j] != 1) os << "^" << e[j];
      }
    }
    return os.str();
  }

 private:
  void check_same(const Polynomial& o) const {
    if (o.dim_ != dim_) throw bad_input("polynomial dimension mismatch");
  }

  int dim_ = 0;
  TermMap terms_;
};

/// Substitutes x = M u + b into p, giving a polynomial in the k = M.cols() variables u.
inline Polynomial compose_affine(const Polynomial& p, const Eigen::MatrixXd& M, const Eigen::VectorXd& b) {
  const int n = p.dimension();
  if (M.rows() != n || b.size() != n) throw bad_input("compose_affine: shape mismatch");
  const int k = static_cast<int>(M.cols());

  std::vector<Polynomial> linear;
  linear.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Polynomial l = Polynomial::constant(k, b(i));
    for (int j = 0; j < k; ++j) {
      if (M(i, j) != 0.0) l += Polynomial::variable(k, j) * M(i, j);
    }
    linear.push_back(std::move(l));
  }

  // powers[i][e] = linear[i]^e, filled lazily
  std::vector<std::vector<Polynomial>> powers(static_cast<std::size_t>(n));
  auto power = [&](int i, int e) -> const Polynomial& {
    auto& cache = powers[static_cast<std::size_t>(i)];
    if (cache.empty()) cache.push_back(Polynomial::constant(k, 1.0));
    while (static_cast<int>(cache.size()) <= e) cache.push_back(cache.back() * linear[static_cast<std::size_t>(i)]);
    return cache[static_cast<std::size_t>(e)];
  };

  Polynomial out(k);
  for (const auto& [e, c] : p.terms()) {
    Polynomial t = Polynomial::constant(k, c);
    for (int i = 0; i < n; ++i) {
      if (e[static_cast<std::size_t>(i)] != 0) t = t * power(i, e[static_cast<std::size_t>(i)]);
    }
    out += t;
  }
  return out;
}

/**
 * Restricts p to the simplex with the given k+1 vertices. The result is a
 * polynomial in lambda_1..lambda_k with lambda_0 = 1 - sum(lambda_j), i.e. it
 * evaluates p(lambda_0 u_0 + ... + lambda_k u_k).
 */
inline Polynomial restrict_to_simplex(const Polynomial& p, std::span<const Eigen::VectorXd> vertices) {
  if (vertices.size() < 2) throw bad_input("restrict_to_simplex: need at least two vertices");
  const int n = p.dimension();
  const int k = static_cast<int>(vertices.size()) - 1;
  Eigen::MatrixXd M(n, k);
  for (int j = 0; j < k; ++j) {
    if (vertices[static_cast<std::size_t>(j) + 1].size() != n) throw bad_input("restrict_to_simplex: vertex dimension");
    M.col(j) = vertices[static_cast<std::size_t>(j) + 1] - vertices[0];
  }
  if (vertices[0].size() != n) throw bad_input("restrict_to_simplex: vertex dimension");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  lu.setThreshold(1e-12);
  if (lu.rank() < k) throw bad_input("restrict_to_simplex: affinely dependent vertices");
  return compose_affine(p, M, vertices[0]);
}

class UnivariatePolynomial {
 public:
  UnivariatePolynomial() = default;
  explicit UnivariatePolynomial(std::vector<double> ascending) : c_(std::move(ascending)) { trim(); }

  static UnivariatePolynomial from_polynomial(const Polynomial& p) {
    if (p.dimension() != 1) throw bad_input("univariate conversion needs a 1-variable polynomial");
    std::vector<double> c(static_cast<std::size_t>(std::max(p.degree(), 0)) + 1, 0.0);
    for (const auto& [e, v] : p.terms()) c[static_cast<std::size_t>(e[0])] = v;
    return UnivariatePolynomial(std::move(c));
  }

  static UnivariatePolynomial from_roots(std::span<const double> roots, double lead = 1.0) {
    std::vector<double> c{lead};
    for (double r : roots) {
      std::vector<double> next(c.size() + 1, 0.0);
      for (std::size_t i = 0; i < c.size(); ++i) {
        next[i + 1] += c[i];
        next[i] -= r * c[i];
      }
      c = std::move(next);
    }
    return UnivariatePolynomial(std::move(c));
  }

  const std::vector<double>& coefficients() const { return c_; }
  int degree() const { return is_zero() ? -1 : static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }

  bool is_negligible(double threshold) const {
    return std::all_of(c_.begin(), c_.end(), [threshold](double v) { return std::abs(v) < threshold; });
  }

  double evaluate(double x) const {
    double r = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + *it;
    return r;
  }

  UnivariatePolynomial derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<double> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<double>(i);
    return UnivariatePolynomial(std::move(d));
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
  }

  std::vector<double> c_;
};

struct RealRoot {
  double value = 0.0;
  // The polynomial does not change sign across this root (even multiplicity).
  bool even_touch = false;
};

namespace detail {

inline int sign_of(double v, double zero) { return v > zero ? 1 : (v < -zero ? -1 : 0); }

inline int bernstein_variations(const std::vector<double>& b, double zero) {
  int prev = 0, count = 0;
  for (double v : b) {
    const int s = sign_of(v, zero);
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++count;
    prev = s;
  }
  return count;
}

// de Casteljau split of Bernstein coefficients at parameter s.
inline void bernstein_split(const std::vector<double>& b, double s, std::vector<double>& left, std::vector<double>& right) {
  const std::size_t n = b.size();
  std::vector<double> work = b;
  left.assign(n, 0.0);
  right.assign(n, 0.0);
  left[0] = work[0];
  right[n - 1] = work[n - 1];
  for (std::size_t r = 1; r < n; ++r) {
    for (std::size_t i = 0; i + r < n; ++i) work[i] = (1.0 - s) * work[i] + s * work[i + 1];
    left[r] = work[0];
    right[n - 1 - r] = work[n - 1 - r];
  }
}

struct RootIsolator {
  const UnivariatePolynomial& q;
  double tol;
  double zero;  // magnitude below which a Bernstein coefficient counts as 0
  double resolution;  // width at which a multi-variation interval becomes a cluster
  std::vector<std::pair<double, double>> clusters;  // intervals containing roots
  std::vector<char> simple;

  void refine_simple(double lo, double hi) {
    double flo = q.evaluate(lo);
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = q.evaluate(mid);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((fm > 0) == (flo > 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    clusters.emplace_back(lo, hi);
    simple.push_back(1);
  }

  void run(const std::vector<double>& b, double lo, double hi, int depth) {
    const int var = bernstein_variations(b, zero);
    if (var == 0) return;
    const int s0 = sign_of(b.front(), zero);
    const int s1 = sign_of(b.back(), zero);
    if (var == 1 && s0 != 0 && s1 != 0 && s0 != s1) {
      refine_simple(lo, hi);
      return;
    }
    if (hi - lo < std::max(tol, resolution) || depth >= 60) {
      clusters.emplace_back(lo, hi);
      simple.push_back(0);
      return;
    }
    // Avoid splitting exactly on a root; roots at the split point would be
    // invisible to both children.
    double s = 0.5;
    const double scale = std::max(std::abs(b.front()), std::abs(b.back())) + zero;
    for (double cand : {0.5, 0.4375, 0.5625, 0.40625}) {
      s = cand;
      if (std::abs(q.evaluate(lo + cand * (hi - lo))) > 1e-13 * scale) break;
    }
    std::vector<double> left, right;
    bernstein_split(b, s, left, right);
    const double mid = lo + s * (hi - lo);
    run(left, lo, mid, depth + 1);
    run(right, mid, hi, depth + 1);
  }
};

}  // namespace detail

/**
 * Real roots of q in the open interval (a, b), sorted ascending.
 *
 * Sign-change (Descartes rule in the Bernstein basis) subdivision isolates
 * roots; intervals with exactly one sign variation are polished by bisection
 * to width < tol. Multiple roots collapse into one entry; even_touch is set when
 * q has the same sign on both sides.
 *
 * Throws ZeroPolynomialError when q is identically zero.
 */
inline std::vector<RealRoot> real_roots_in_interval(const UnivariatePolynomial& q, double a, double b, double tol = 1e-12) {
  if (!(a < b)) throw bad_input("real_roots_in_interval: need a < b");
  if (q.is_zero()) throw ZeroPolynomialError();
  const int d = q.degree();
  if (d == 0) return {};

  // Power coefficients of q(a + (b - a) s).
  const auto& c = q.coefficients();
  std::vector<double> shifted(static_cast<std::size_t>(d) + 1, 0.0);
  {
    // Horner-style Taylor shift then scale.
    std::vector<double> work = c;
    for (int i = 0; i <= d; ++i) {
      for (int j = d - 1; j >= i; --j) work[static_cast<std::size_t>(j)] += a * work[static_cast<std::size_t>(j) + 1];
    }
    double scale = 1.0;
    for (int i = 0; i <= d; ++i) {
      shifted[static_cast<std::size_t>(i)] = work[static_cast<std::size_t>(i)] * scale;
      scale *= (b - a);
    }
  }
  // Power basis -> Bernstein basis on [0, 1].
  std::vector<double> bern(static_cast<std::size_t>(d) + 1, 0.0);
  {
    std::vector<double> binom_d(static_cast<std::size_t>(d) + 1, 1.0);
    for (int k = 1; k <= d; ++k) binom_d[static_cast<std::size_t>(k)] = binom_d[static_cast<std::size_t>(k) - 1] * (d - k + 1) / k;
    for (int i = 0; i <= d; ++i) {
      double binom_ik = 1.0;
      double acc = 0.0;
      for (int k = 0; k <= i; ++k) {
        if (k > 0) binom_ik = binom_ik * (i - k + 1) / k;
        acc += binom_ik / binom_d[static_cast<std::size_t>(k)] * shifted[static_cast<std::size_t>(k)];
      }
      bern[static_cast<std::size_t>(i)] = acc;
    }
  }
  double maxb = 0.0;
  for (double v : bern) maxb = std::max(maxb, std::abs(v));
  if (maxb == 0.0) throw ZeroPolynomialError();

  // Exact signs: rounding noise around a multiple root shows up as extra
  // variations, which is what keeps even roots from disappearing.
  detail::RootIsolator iso{q, tol, 0.0, 1e-7 * (b - a), {}, {}};
  iso.run(bern, a, b, 0);

  std::vector<RealRoot> roots;
  const double edge = std::max(tol, 1e-14 * (b - a));
  const double merge = std::max(2 * tol, 1e-7 * (b - a));
  for (std::size_t i = 0; i < iso.clusters.size(); ++i) {
    auto [lo, hi] = iso.clusters[i];
    // Merge touching clusters from the same multiple root.
    while (i + 1 < iso.clusters.size() && iso.clusters[i + 1].first - hi <= merge) {
      hi = iso.clusters[i + 1].second;
      ++i;
    }
    const double r = 0.5 * (lo + hi);
    if (r - a <= edge || b - r <= edge) continue;
    if (!iso.simple[i]) {
      // Keep a cluster only if q vanishes there up to evaluation noise; a
      // complex pair close to the axis also produces sign variations.
      double mag = 0.0, xp = 1.0;
      for (double ci : c) {
        mag += std::abs(ci) * xp;
        xp *= std::abs(r);
      }
      if (std::abs(q.evaluate(r)) > 1e3 * std::numeric_limits<double>::epsilon() * mag) continue;
    }
    RealRoot root{r, false};
    const double probe = std::max(4 * tol, 1e-6 * (b - a));
    const double left = std::max(a, lo - probe), right = std::min(b, hi + probe);
    const double fl = q.evaluate(left), fr = q.evaluate(right);
    root.even_touch = (fl > 0) == (fr > 0) && fl != 0.0 && fr != 0.0;
    roots.push_back(root);
  }
  return roots;
}

namespace detail {

class PolyParser {
 public:
  PolyParser(std::string_view text, int dim) : s_(text), dim_(dim) {}

  Polynomial parse() {
    Polynomial out(dim_);
    skip_ws();
    if (pos_ == s_.size()) throw error("empty polynomial");
    bool first = true;
    while (true) {
      skip_ws();
      if (pos_ == s_.size()) break;
      double sign = 1.0;
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1.0 : 1.0;
        ++pos_;
      } else if (!first) {
        throw error("expected '+' or '-'");
      }
      first = false;
      auto [e, c] = term();
      out.add_term(std::move(e), sign * c);
    }
    return out;
  }

 private:
  std::pair<Exponent, double> term() {
    Exponent e(static_cast<std::size_t>(dim_), 0);
    double c = 1.0;
    bool any = false;
    while (true) {
      skip_ws();
      if (pos_ == s_.size()) break;
      const char ch = peek();
      if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
        c *= number();
      } else if (std::isalpha(static_cast<unsigned char>(ch))) {
        const int v = variable();
        int p = 1;
        skip_ws();
        if (pos_ < s_.size() && peek() == '^') {
          ++pos_;
          skip_ws();
          const std::size_t start = pos_;
          while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
          if (start == pos_) throw error("expected integer exponent");
          p = std::stoi(std::string(s_.substr(start, pos_ - start)));
        }
        e[static_cast<std::size_t>(v)] += p;
      } else {
        break;
      }
      any = true;
      skip_ws();
      if (pos_ < s_.size() && peek() == '*') {
        ++pos_;
        continue;
      }
    }
    if (!any) throw error("expected a term");
    return {e, c};
  }

  double number() {
    const char* begin = s_.data() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw error("bad number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  int variable() {
    const char ch = peek();
    ++pos_;
    int idx = -1;
    if (ch == 'x' && pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(peek()))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
      idx = std::stoi(std::string(s_.substr(start, pos_ - start))) - 1;
    } else if (ch == 'x') {
      idx = 0;
    } else if (ch == 'y') {
      idx = 1;
    } else if (ch == 'z') {
      idx = 2;
    } else if (ch == 'w') {
      idx = 3;
    } else {
      throw error(std::string("unknown variable '") + ch + "'");
    }
    if (idx < 0 || idx >= dim_) throw error("variable index exceeds dimension " + std::to_string(dim_));
    return idx;
  }

  char peek() const { return s_[pos_]; }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  Error error(const std::string& msg) const {
    return bad_input("polynomial parse error at column " + std::to_string(pos_ + 1) + ": " + msg);
  }

  std::string_view s_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses `coef * x1^e1 ... xn^en` terms joined by + and -.
inline Polynomial parse_polynomial(std::string_view text, int dimension) {
  return detail::PolyParser(text, dimension).parse();
}

}  // namespace convtraj
