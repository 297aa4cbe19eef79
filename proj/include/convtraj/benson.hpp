#pragma once
/**
 * Convex hulls through Benson's outer approximation algorithm.
 *
 * The points p_1..p_N in R^n are lifted to m_i = (p_i, -e^T p_i) in R^{n+1}.
 * The upper image conv{m_i} + R^{n+1}_+ has the face e^T y = 0, which is the
 * lifted hull; dropping the last coordinate recovers conv{p_i}.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "convtraj/error.hpp"
#include "convtraj/lp.hpp"
#include "convtraj/polytope.hpp"

namespace convtraj {

/// Bounded polyhedron {y : a_k . y >= b_k} with its vertices and active sets.
class HPolytope {
 public:
  struct Vertex {
    Eigen::VectorXd y;
    std::vector<int> active;  // sorted constraint indices
  };

  static HPolytope box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    const int D = static_cast<int>(lo.size());
    if (hi.size() != D || !(hi.array() > lo.array()).all()) throw bad_input("box: need lo < hi");
    HPolytope P;
    P.dim_ = D;
    for (int j = 0; j < D; ++j) P.add_constraint(Eigen::VectorXd::Unit(D, j), lo(j));
    for (int j = 0; j < D; ++j) P.add_constraint(-Eigen::VectorXd::Unit(D, j), -hi(j));
    for (int mask = 0; mask < (1 << D); ++mask) {
      Vertex v;
      v.y.resize(D);
      for (int j = 0; j < D; ++j) {
        const bool up = (mask >> j) & 1;
        v.y(j) = up ? hi(j) : lo(j);
        v.active.push_back(up ? D + j : j);
      }
      std::sort(v.active.begin(), v.active.end());
      P.verts_.push_back(std::move(v));
    }
    P.scale_ = std::max({1.0, lo.cwiseAbs().maxCoeff(), hi.cwiseAbs().maxCoeff()});
    return P;
  }

  int dimension() const { return dim_; }
  const std::vector<Vertex>& vertices() const { return verts_; }
  const std::vector<Eigen::VectorXd>& normals() const { return a_; }
  const std::vector<double>& offsets() const { return b_; }
  std::size_t constraint_count() const { return a_.size(); }

  struct CutResult {
    bool changed = false;
    std::vector<std::size_t> created;  // indices of new vertices in vertices()
    std::vector<long> origin;          // previous index of each vertex, -1 if new
    int constraint = -1;
  };

  /**
   * Intersects with a . y >= b. Vertices strictly violating are removed, new
   * vertices appear on edges joining kept and removed vertices. Nothing is
   * added if no vertex is cut off by more than tol.
   */
  CutResult cut(const Eigen::VectorXd& a, double b, double tol = 1e-10) {
    CutResult res;
    const double t = tol * scale_ * std::max(1.0, a.cwiseAbs().sum());
    std::vector<double> s(verts_.size());
    bool any_minus = false;
    for (std::size_t i = 0; i < verts_.size(); ++i) {
      s[i] = a.dot(verts_[i].y) - b;
      any_minus |= s[i] < -t;
    }
    if (!any_minus) return res;
    const int k = add_constraint(a, b);
    res.constraint = k;
    res.changed = true;

    std::vector<std::size_t> plus, minus, zero;
    for (std::size_t i = 0; i < verts_.size(); ++i) (s[i] > t ? plus : s[i] < -t ? minus : zero).push_back(i);

    std::vector<Vertex> fresh;
    for (std::size_t ip : plus) {
      const auto& p = verts_[ip];
      for (std::size_t iq : minus) {
        const auto& q = verts_[iq];
        std::vector<int> common;
        std::set_intersection(p.active.begin(), p.active.end(), q.active.begin(), q.active.end(),
                              std::back_inserter(common));
        if (static_cast<int>(common.size()) < dim_ - 1) continue;
        if (!spans_edge(common)) continue;
        const double alpha = s[ip] / (s[ip] - s[iq]);
        Vertex v;
        v.y = p.y + alpha * (q.y - p.y);
        v.active = common;
        v.active.push_back(k);
        std::sort(v.active.begin(), v.active.end());
        fresh.push_back(std::move(v));
      }
    }

    std::vector<Vertex> next;
    next.reserve(plus.size() + zero.size() + fresh.size());
    for (std::size_t i : plus) {
      next.push_back(std::move(verts_[i]));
      res.origin.push_back(static_cast<long>(i));
    }
    const std::size_t first_zero = next.size();
    for (std::size_t i : zero) {
      res.origin.push_back(static_cast<long>(i));
      next.push_back(std::move(verts_[i]));
      auto& act = next.back().active;
      act.insert(std::upper_bound(act.begin(), act.end(), k), k);
    }
    const double merge = t;
    for (auto& v : fresh) {
      bool merged = false;
      for (std::size_t j = first_zero; j < next.size(); ++j) {
        if ((next[j].y - v.y).cwiseAbs().maxCoeff() <= merge) {
          std::vector<int> u;
          std::set_union(next[j].active.begin(), next[j].active.end(), v.active.begin(), v.active.end(),
                         std::back_inserter(u));
          next[j].active = std::move(u);
          merged = true;
          break;
        }
      }
      if (!merged) {
        res.created.push_back(next.size());
        res.origin.push_back(-1);
        next.push_back(std::move(v));
      }
    }
    verts_ = std::move(next);
    return res;
  }

 private:
  int add_constraint(const Eigen::VectorXd& a, double b) {
    a_.push_back(a);
    b_.push_back(b);
    return static_cast<int>(a_.size()) - 1;
  }

  bool spans_edge(const std::vector<int>& idx) const {
    Eigen::MatrixXd N(static_cast<Eigen::Index>(idx.size()), dim_);
    for (std::size_t r = 0; r < idx.size(); ++r) N.row(static_cast<Eigen::Index>(r)) = a_[static_cast<std::size_t>(idx[r])].normalized().transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(N);
    lu.setThreshold(1e-9);
    return lu.rank() == dim_ - 1;
  }

  int dim_ = 0;
  double scale_ = 1.0;
  std::vector<Eigen::VectorXd> a_;
  std::vector<double> b_;
  std::vector<Vertex> verts_;
};

struct BensonTrace {
  int iteration = 0;
  double max_tstar = 0.0;
  const HPolytope* outer = nullptr;
};

struct BensonOptions {
  double eps = 1e-9;
  long max_iterations = 200000;
  std::function<void(const BensonTrace&)> trace;
};

struct BensonStats {
  long iterations = 0;
  long lp_solves = 0;
  long lp_pivots = 0;
  long skipped_cuts = 0;
  std::size_t outer_vertices = 0;
};

namespace detail {

// min t s.t. sum_i lambda_i m_i <= v + t e, sum lambda = 1, lambda >= 0.
class BoundaryLp {
 public:
  explicit BoundaryLp(const Eigen::MatrixXd& M) : M_(M), D_(static_cast<int>(M.rows())), N_(static_cast<int>(M.cols())) {
    A_.setZero(D_ + 1, N_ + 2 + D_);
    A_.topLeftCorner(D_, N_) = M;
    A_.row(D_).head(N_).setOnes();
    A_.col(N_).head(D_).setConstant(-1.0);
    A_.col(N_ + 1).head(D_).setConstant(1.0);
    for (int j = 0; j < D_; ++j) A_(j, N_ + 2 + j) = 1.0;
    c_ = Eigen::VectorXd::Zero(N_ + 2 + D_);
    c_(N_) = 1.0;
    c_(N_ + 1) = -1.0;
  }

  struct Result {
    double tstar;
    Eigen::VectorXd w;  // cut normal, w >= 0, sum w = 1
    long pivots;
  };

  Result solve(const Eigen::VectorXd& v) const {
    // Warm start from the single point that needs the smallest shift.
    int i0 = 0, jstar = 0;
    double tbest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < N_; ++i) {
      Eigen::Index j;
      const double t = (M_.col(i) - v).maxCoeff(&j);
      if (t < tbest) {
        tbest = t;
        i0 = i;
        jstar = static_cast<int>(j);
      }
    }
    std::vector<int> basis{i0, tbest >= 0 ? N_ : N_ + 1};
    for (int j = 0; j < D_; ++j) {
      if (j != jstar) basis.push_back(N_ + 2 + j);
    }
    Eigen::VectorXd b(D_ + 1);
    b.head(D_) = v;
    b(D_) = 1.0;
    const SimplexResult r = simplex_standard(A_, b, c_, basis);
    Result out;
    out.tstar = r.value;
    out.w = (-r.y.head(D_)).cwiseMax(0.0);
    const double s = out.w.sum();
    if (!(s > 0)) throw numerical("benson: degenerate dual");
    out.w /= s;
    out.pivots = r.iterations;
    return out;
  }

 private:
  const Eigen::MatrixXd& M_;
  int D_, N_;
  Eigen::MatrixXd A_;
  Eigen::VectorXd c_;
};

}  // namespace detail

/**
 * V- and H-representation of conv(points) by Benson's algorithm on the
 * lifted problem. Output vertices are input points; facets are the cut
 * hyperplanes restricted to the hull slice and refitted on their vertices.
 */
inline PolytopeData convex_hull_molp(const std::vector<Eigen::VectorXd>& points, const BensonOptions& opt = {},
                                     BensonStats* stats = nullptr) {
  if (points.empty()) throw bad_input("hull: no points");
  const int n = static_cast<int>(points.front().size());
  for (const auto& p : points) {
    if (p.size() != n || !p.allFinite()) throw bad_input("hull: inconsistent or non-finite points");
  }
  if (n < 1) throw bad_input("hull: dimension must be positive");
  if (static_cast<int>(points.size()) < n + 1) throw bad_input("degenerate point set: fewer than n+1 points");
  if (!(opt.eps > 0)) throw bad_input("hull: eps must be positive");
  const double scale = detail::coordinate_scale(points);
  const auto kept = dedupe_points(points, 1e-12 * scale);
  {
    std::vector<Eigen::VectorXd> k;
    for (int i : kept) k.push_back(points[static_cast<std::size_t>(i)]);
    if (detail::affine_rank(k, 1e-12 * scale) < n) throw bad_input("degenerate point set: points do not span R^n");
  }

  const int D = n + 1;
  const int N = static_cast<int>(kept.size());
  Eigen::MatrixXd M(D, N);
  for (int i = 0; i < N; ++i) {
    const auto& p = points[static_cast<std::size_t>(kept[static_cast<std::size_t>(i)])];
    M.col(i).head(n) = p;
    M(n, i) = -p.sum();
  }
  const Eigen::VectorXd lo = M.rowwise().minCoeff();
  const double range = (M.rowwise().maxCoeff() - lo).maxCoeff();
  const Eigen::VectorXd hi = M.rowwise().maxCoeff().array() + std::max(1.0, range);

  HPolytope O = HPolytope::box(lo, hi);
  const int slice_constraint = static_cast<int>(O.constraint_count());
  O.cut(Eigen::VectorXd::Ones(D), 0.0);

  detail::BoundaryLp lp(M);
  BensonStats st;
  std::vector<double> tstar;  // parallel to O.vertices()
  std::vector<char> treated;
  auto evaluate = [&](std::size_t i) {
    const auto r = lp.solve(O.vertices()[i].y);
    ++st.lp_solves;
    st.lp_pivots += r.pivots;
    return r.tstar;
  };
  for (std::size_t i = 0; i < O.vertices().size(); ++i) {
    tstar.push_back(evaluate(i));
    treated.push_back(0);
  }

  while (true) {
    if (st.iterations >= opt.max_iterations) throw numerical("benson: iteration limit reached");
    std::size_t pick = O.vertices().size();
    for (std::size_t i = 0; i < O.vertices().size(); ++i) {
      if (treated[i] || tstar[i] <= opt.eps) continue;
      if (pick == O.vertices().size() || tstar[i] > tstar[pick] ||
          (tstar[i] == tstar[pick] &&
           std::lexicographical_compare(O.vertices()[i].y.data(), O.vertices()[i].y.data() + D,
                                        O.vertices()[pick].y.data(), O.vertices()[pick].y.data() + D))) {
        pick = i;
      }
    }
    if (pick == O.vertices().size()) break;
    ++st.iterations;

    const auto r = lp.solve(O.vertices()[pick].y);
    ++st.lp_solves;
    st.lp_pivots += r.pivots;
    const Eigen::VectorXd w = r.w;
    const double gamma = (w.transpose() * M).minCoeff();

    bool duplicate = false;
    for (std::size_t k = 0; k < O.constraint_count(); ++k) {
      if ((O.normals()[k] - w).cwiseAbs().maxCoeff() < 1e-12 && std::abs(O.offsets()[k] - gamma) < 1e-12 * scale) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) {
      treated[pick] = 1;
      ++st.skipped_cuts;
      continue;
    }

    const auto cut = O.cut(w, gamma);
    if (!cut.changed) {
      treated[pick] = 1;
      ++st.skipped_cuts;
      continue;
    }
    std::vector<double> t2(O.vertices().size());
    std::vector<char> tr2(O.vertices().size(), 0);
    for (std::size_t i = 0; i < O.vertices().size(); ++i) {
      const long o = cut.origin[i];
      if (o < 0) {
        t2[i] = evaluate(i);
      } else {
        t2[i] = tstar[static_cast<std::size_t>(o)];
        tr2[i] = treated[static_cast<std::size_t>(o)];
      }
    }
    tstar = std::move(t2);
    treated = std::move(tr2);
    if (opt.trace) {
      BensonTrace tr;
      tr.iteration = static_cast<int>(st.iterations);
      tr.max_tstar = r.tstar;
      tr.outer = &O;
      opt.trace(tr);
    }
  }
  st.outer_vertices = O.vertices().size();
  if (stats) *stats = st;

  // Recover the hull from the face e^T y = 0 of the outer approximation.
  const double snap = std::max(1e-7, 10.0 * D * opt.eps) * scale;
  std::vector<char> taken(points.size(), 0);
  std::vector<Eigen::VectorXd> verts;
  std::vector<int> src;
  for (const auto& v : O.vertices()) {
    if (!std::binary_search(v.active.begin(), v.active.end(), slice_constraint)) continue;
    const Eigen::VectorXd p = v.y.head(n);
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (int i : kept) {
      const double d = (points[static_cast<std::size_t>(i)] - p).norm();
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    if (best < 0 || bd > snap || taken[static_cast<std::size_t>(best)]) continue;
    taken[static_cast<std::size_t>(best)] = 1;
    verts.push_back(points[static_cast<std::size_t>(best)]);
    src.push_back(best);
  }
  if (static_cast<int>(verts.size()) < n + 1) throw numerical("benson: too few vertices recovered");

  std::vector<Eigen::VectorXd> candidates;
  for (std::size_t k = 0; k < O.constraint_count(); ++k) {
    if (static_cast<int>(k) == slice_constraint) continue;
    const auto& a = O.normals()[k];
    const Eigen::VectorXd c = a.head(n).array() - a(n);
    if (c.norm() < 1e-12) continue;
    candidates.push_back(-c);
  }
  const double factor = std::max(1.0, 40.0 * D * opt.eps / 1e-9);
  return finalize_polytope(verts, src, candidates, std::max(1e-9, opt.eps), factor);
}

}  // namespace convtraj
