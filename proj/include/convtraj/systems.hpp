#pragma once
/**
 * Polynomial vector fields and their sources: explicit components, Hamiltonian
 * systems, Jacobian minors of algebraic curves, mass-action reaction networks
 * and linear systems. Also the trigonometric space curves used as parametric
 * test curves.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "convtraj/error.hpp"
#include "convtraj/poly.hpp"

namespace convtraj {

class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(std::vector<Polynomial> components) : comps_(std::move(components)) {
    const int n = static_cast<int>(comps_.size());
    for (const auto& c : comps_) {
      if (c.dimension() != n) throw bad_input("vector field components must have dimension n");
    }
  }

  int dimension() const { return static_cast<int>(comps_.size()); }
  const std::vector<Polynomial>& components() const { return comps_; }
  const Polynomial& operator[](int i) const { return comps_[static_cast<std::size_t>(i)]; }

  Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const {
    if (x.size() != dimension()) throw bad_input("vector field: dimension mismatch");
    Eigen::VectorXd out(dimension());
    for (int i = 0; i < dimension(); ++i) out(i) = comps_[static_cast<std::size_t>(i)].evaluate(x);
    return out;
  }

  /// The scalar polynomial phi . v.
  Polynomial dot(const Eigen::VectorXd& v) const {
    if (v.size() != dimension()) throw bad_input("vector field: dimension mismatch");
    Polynomial out(dimension());
    for (int i = 0; i < dimension(); ++i) {
      if (v(i) != 0.0) out += comps_[static_cast<std::size_t>(i)] * v(i);
    }
    return out;
  }

  /// phi . grad(f), expanded symbolically.
  Polynomial dot_gradient(const Polynomial& f) const {
    if (f.dimension() != dimension()) throw bad_input("vector field: dimension mismatch");
    Polynomial out(dimension());
    for (int i = 0; i < dimension(); ++i) out += comps_[static_cast<std::size_t>(i)] * f.partial_derivative(i);
    return out;
  }

  VectorField scaled(double c) const {
    std::vector<Polynomial> s = comps_;
    for (auto& p : s) p *= c;
    return VectorField(std::move(s));
  }

  /**
   * Field seen in the coordinates u of an affine chart x = offset + basis u
   * with orthonormal columns: basis^T phi(offset + basis u).
   */
  VectorField reduced(const Eigen::MatrixXd& basis, const Eigen::VectorXd& offset) const {
    const int k = static_cast<int>(basis.cols());
    std::vector<Polynomial> composed;
    for (const auto& c : comps_) composed.push_back(compose_affine(c, basis, offset));
    std::vector<Polynomial> out;
    for (int j = 0; j < k; ++j) {
      Polynomial p(k);
      for (int i = 0; i < dimension(); ++i) {
        if (basis(i, j) != 0.0) p += composed[static_cast<std::size_t>(i)] * basis(i, j);
      }
      out.push_back(std::move(p));
    }
    return VectorField(std::move(out));
  }

  friend bool operator==(const VectorField&, const VectorField&) = default;

 private:
  std::vector<Polynomial> comps_;
};

/// (dh/dy, -dh/dx)
inline VectorField hamiltonian_field(const Polynomial& h) {
  if (h.dimension() != 2) throw bad_input("hamiltonian_field: h must be bivariate");
  return VectorField({h.partial_derivative(1), -h.partial_derivative(0)});
}

namespace detail {

inline Polynomial polynomial_determinant(const std::vector<std::vector<Polynomial>>& m, int dim) {
  const std::size_t k = m.size();
  if (k == 0) return Polynomial::constant(dim, 1.0);
  if (k == 1) return m[0][0];
  Polynomial out(dim);
  for (std::size_t col = 0; col < k; ++col) {
    if (m[0][col].is_zero()) continue;
    std::vector<std::vector<Polynomial>> minor;
    for (std::size_t r = 1; r < k; ++r) {
      std::vector<Polynomial> row;
      for (std::size_t c = 0; c < k; ++c) {
        if (c != col) row.push_back(m[r][c]);
      }
      minor.push_back(std::move(row));
    }
    Polynomial term = m[0][col] * polynomial_determinant(minor, dim);
    if (col % 2 == 1) term = -term;
    out += term;
  }
  return out;
}

}  // namespace detail

/**
 * Vector field tangent to the curve cut out by f_1..f_{n-1}: component i is
 * (-1)^i (0-based) times the minor of the Jacobian with column i deleted.
 */
inline VectorField jacobian_minor_field(const std::vector<Polynomial>& f) {
  const int n = static_cast<int>(f.size()) + 1;
  for (const auto& p : f) {
    if (p.dimension() != n) throw bad_input("jacobian_minor_field: need n-1 polynomials in n variables");
  }
  if (n < 2) throw bad_input("jacobian_minor_field: need at least one polynomial");
  std::vector<std::vector<Polynomial>> jac(f.size());
  for (std::size_t r = 0; r < f.size(); ++r) {
    for (int j = 0; j < n; ++j) jac[r].push_back(f[r].partial_derivative(j));
  }
  std::vector<Polynomial> comps;
  for (int i = 0; i < n; ++i) {
    std::vector<std::vector<Polynomial>> sub;
    for (const auto& row : jac) {
      std::vector<Polynomial> r;
      for (int j = 0; j < n; ++j) {
        if (j != i) r.push_back(row[static_cast<std::size_t>(j)]);
      }
      sub.push_back(std::move(r));
    }
    Polynomial d = detail::polynomial_determinant(sub, n);
    comps.push_back(i % 2 == 0 ? d : -d);
  }
  return VectorField(std::move(comps));
}

inline VectorField linear_field(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols() || A.rows() == 0) throw bad_input("linear_field: need a square matrix");
  const int n = static_cast<int>(A.rows());
  std::vector<Polynomial> comps;
  for (int i = 0; i < n; ++i) {
    Polynomial p(n);
    for (int j = 0; j < n; ++j) {
      if (A(i, j) != 0.0) p += Polynomial::variable(n, j) * A(i, j);
    }
    comps.push_back(std::move(p));
  }
  return VectorField(std::move(comps));
}

// ---------------------------------------------------------------------------
// Mass-action networks

struct Reaction {
  int source = 0;  // 0-based complex index
  int target = 0;
  double rate = 0.0;
  friend bool operator==(const Reaction&, const Reaction&) = default;
};

class ReactionNetwork {
 public:
  ReactionNetwork() = default;
  ReactionNetwork(int species, std::vector<Exponent> complexes, std::vector<Reaction> edges)
      : n_(species), complexes_(std::move(complexes)), edges_(std::move(edges)) {
    validate();
  }

  int species_count() const { return n_; }
  int complex_count() const { return static_cast<int>(complexes_.size()); }
  const std::vector<Exponent>& complexes() const { return complexes_; }
  const std::vector<Reaction>& edges() const { return edges_; }

  ReactionNetwork with_scaled_rates(double c) const {
    if (!(c > 0)) throw bad_input("rate scale must be positive");
    auto e = edges_;
    for (auto& r : e) r.rate *= c;
    return ReactionNetwork(n_, complexes_, std::move(e));
  }

  friend bool operator==(const ReactionNetwork&, const ReactionNetwork&) = default;

 private:
  void validate() const {
    if (n_ <= 0) throw bad_input("network: species count must be positive");
    for (const auto& a : complexes_) {
      if (static_cast<int>(a.size()) != n_) throw bad_input("network: complex length must equal species count");
      for (int v : a) {
        if (v < 0) throw bad_input("network: negative stoichiometric coefficient");
      }
    }
    std::set<std::pair<int, int>> seen;
    for (const auto& r : edges_) {
      if (r.source < 0 || r.target < 0 || r.source >= complex_count() || r.target >= complex_count())
        throw bad_input("network: edge endpoint out of range");
      if (r.source == r.target) throw bad_input("network: self loop");
      if (!(r.rate > 0)) throw bad_input("network: rates must be positive");
      if (!seen.emplace(r.source, r.target).second) throw bad_input("network: duplicate edge");
    }
  }

  int n_ = 0;
  std::vector<Exponent> complexes_;
  std::vector<Reaction> edges_;
};

/// Graph Laplacian with kappa_ij off the diagonal and zero row sums.
inline Eigen::MatrixXd laplacian(const ReactionNetwork& net) {
  const int m = net.complex_count();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
  for (const auto& r : net.edges()) {
    L(r.source, r.target) += r.rate;
    L(r.source, r.source) -= r.rate;
  }
  return L;
}

/// phi(x) = (x^a_1, ..., x^a_m) * Laplacian * (a_1, ..., a_m)^T
inline VectorField crn_field(const ReactionNetwork& net) {
  const int n = net.species_count();
  const int m = net.complex_count();
  const Eigen::MatrixXd L = laplacian(net);
  Eigen::MatrixXd Y(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) Y(i, j) = net.complexes()[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  const Eigen::MatrixXd LY = L * Y;
  std::vector<Polynomial> comps(static_cast<std::size_t>(n), Polynomial(n));
  for (int i = 0; i < m; ++i) {
    for (int l = 0; l < n; ++l) {
      if (LY(i, l) != 0.0) comps[static_cast<std::size_t>(l)].add_term(net.complexes()[static_cast<std::size_t>(i)], LY(i, l));
    }
  }
  return VectorField(std::move(comps));
}

struct RealizabilityViolation {
  int component = 0;
  Monomial term;
};

struct RealizabilityVerdict {
  bool realizable = true;
  std::vector<RealizabilityViolation> violations;
};

/// Every negative term of phi_i must be divisible by x_i.
inline RealizabilityVerdict hars_toth_realizable(const VectorField& phi) {
  RealizabilityVerdict v;
  for (int i = 0; i < phi.dimension(); ++i) {
    for (const auto& [e, c] : phi[i].terms()) {
      if (c < 0 && e[static_cast<std::size_t>(i)] == 0) v.violations.push_back({i, {e, c}});
    }
  }
  v.realizable = v.violations.empty();
  return v;
}

/**
 * Whether the Hamiltonian system of h is a mass-action system: pure powers of y
 * need nonnegative coefficients, pure powers of x nonpositive ones. The constant
 * term counts as a pure power of x.
 */
inline bool hamiltonian_realizable(const Polynomial& h) {
  if (h.dimension() != 2) throw bad_input("hamiltonian_realizable: h must be bivariate");
  for (const auto& [e, c] : h.terms()) {
    if (e[1] == 0 && c > 0) return false;
    if (e[0] == 0 && e[1] > 0 && c < 0) return false;
  }
  return true;
}

/// Every connected component of the reaction graph is strongly connected.
inline bool weakly_reversible(const ReactionNetwork& net) {
  const int m = net.complex_count();
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(m));
  for (const auto& r : net.edges()) adj[static_cast<std::size_t>(r.source)].push_back(r.target);

  // Tarjan, iterative.
  std::vector<int> index(static_cast<std::size_t>(m), -1), low(static_cast<std::size_t>(m), 0), comp(static_cast<std::size_t>(m), -1);
  std::vector<char> on_stack(static_cast<std::size_t>(m), 0);
  std::vector<int> stack;
  int counter = 0, ncomp = 0;
  for (int root = 0; root < m; ++root) {
    if (index[static_cast<std::size_t>(root)] >= 0) continue;
    std::vector<std::pair<int, std::size_t>> call{{root, 0}};
    index[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = counter++;
    stack.push_back(root);
    on_stack[static_cast<std::size_t>(root)] = 1;
    while (!call.empty()) {
      auto& [v, it] = call.back();
      const auto& nb = adj[static_cast<std::size_t>(v)];
      if (it < nb.size()) {
        const int w = nb[it++];
        if (index[static_cast<std::size_t>(w)] < 0) {
          index[static_cast<std::size_t>(w)] = low[static_cast<std::size_t>(w)] = counter++;
          stack.push_back(w);
          on_stack[static_cast<std::size_t>(w)] = 1;
          call.emplace_back(w, 0);
        } else if (on_stack[static_cast<std::size_t>(w)]) {
          low[static_cast<std::size_t>(v)] = std::min(low[static_cast<std::size_t>(v)], index[static_cast<std::size_t>(w)]);
        }
        continue;
      }
      if (low[static_cast<std::size_t>(v)] == index[static_cast<std::size_t>(v)]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[static_cast<std::size_t>(w)] = 0;
          comp[static_cast<std::size_t>(w)] = ncomp;
        } while (w != v);
        ++ncomp;
      }
      const int done = v;
      call.pop_back();
      if (!call.empty()) {
        const int parent = call.back().first;
        low[static_cast<std::size_t>(parent)] = std::min(low[static_cast<std::size_t>(parent)], low[static_cast<std::size_t>(done)]);
      }
    }
  }
  return std::all_of(net.edges().begin(), net.edges().end(), [&](const Reaction& r) {
    return comp[static_cast<std::size_t>(r.source)] == comp[static_cast<std::size_t>(r.target)];
  });
}

/**
 * Network text format (1-based complex indices, '#' starts a comment):
 *
 *     species 3
 *     complex 1: 2 1 0
 *     complex 2: 1 0 1
 *     edge 1 2 2.0
 */
inline ReactionNetwork parse_network(std::istream& in) {
  int n = -1;
  std::vector<std::pair<int, Exponent>> complexes;
  std::vector<Reaction> edges;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) { return bad_input("network line " + std::to_string(lineno) + ": " + msg); };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "species") {
      if (!(ls >> n) || n <= 0) throw fail("bad species count");
    } else if (key == "complex") {
      if (n <= 0) throw fail("'species' must come first");
      std::string label;
      if (!(ls >> label)) throw fail("missing complex index");
      if (!label.empty() && label.back() == ':') label.pop_back();
      int idx = 0;
      try {
        idx = std::stoi(label);
      } catch (const std::exception&) {
        throw fail("bad complex index");
      }
      std::string tok;
      if (ls.peek() == ':' || (ls >> std::ws && ls.peek() == ':')) ls.get();
      Exponent e;
      int v;
      while (ls >> v) e.push_back(v);
      if (static_cast<int>(e.size()) != n) throw fail("complex must list " + std::to_string(n) + " exponents");
      complexes.emplace_back(idx, std::move(e));
    } else if (key == "edge") {
      int i, j;
      double k;
      if (!(ls >> i >> j >> k)) throw fail("edge needs 'i j rate'");
      edges.push_back({i - 1, j - 1, k});
    } else {
      throw fail("unknown keyword '" + key + "'");
    }
  }
  if (n <= 0) throw bad_input("network: missing 'species' line");
  std::sort(complexes.begin(), complexes.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Exponent> cx;
  for (std::size_t i = 0; i < complexes.size(); ++i) {
    if (complexes[i].first != static_cast<int>(i) + 1) throw bad_input("network: complexes must be numbered 1..m");
    cx.push_back(complexes[i].second);
  }
  return ReactionNetwork(n, std::move(cx), std::move(edges));
}

inline std::string format_network(const ReactionNetwork& net) {
  std::ostringstream os;
  os << "species " << net.species_count() << "\n";
  for (int i = 0; i < net.complex_count(); ++i) {
    os << "complex " << (i + 1) << ":";
    for (int v : net.complexes()[static_cast<std::size_t>(i)]) os << " " << v;
    os << "\n";
  }
  os.precision(17);
  for (const auto& r : net.edges()) os << "edge " << (r.source + 1) << " " << (r.target + 1) << " " << r.rate << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Trigonometric curves x_j(t) = sum_k A_jk cos(2 pi k t) + B_jk sin(2 pi k t) + C_j

struct TrigCurve {
  Eigen::MatrixXd A;  // n x d
  Eigen::MatrixXd B;  // n x d
  Eigen::VectorXd C;  // n

  TrigCurve() = default;
  TrigCurve(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::VectorXd c) : A(std::move(a)), B(std::move(b)), C(std::move(c)) {
    if (A.rows() != B.rows() || A.cols() != B.cols() || C.size() != A.rows() || A.rows() == 0)
      throw bad_input("trig curve: inconsistent matrix shapes");
  }

  int dimension() const { return static_cast<int>(A.rows()); }
  int degree() const { return static_cast<int>(A.cols()); }
};

inline double wrap_unit(double t) {
  double w = t - std::floor(t);
  if (w >= 1.0) w = 0.0;
  return w;
}

inline Eigen::VectorXd trig_point(const TrigCurve& c, double t) {
  const double w = wrap_unit(t);
  Eigen::VectorXd x = c.C;
  for (int k = 1; k <= c.degree(); ++k) {
    const double a = 2.0 * std::numbers::pi * k * w;
    x += c.A.col(k - 1) * std::cos(a) + c.B.col(k - 1) * std::sin(a);
  }
  return x;
}

}  // namespace convtraj
