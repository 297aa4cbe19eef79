#pragma once
/**
 * Stratification of a sampled convex-hull boundary into patches.
 *
 * In the plane, hull edges are grouped into arcs (chains of short edges) and
 * genuine edges of the curve's hull. From dimension three up, facets whose
 * normals and shapes are delta-close across a shared ridge form one patch, and
 * each facet is reduced to a face conv(U) through proximity clustering of its
 * vertices.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "convtraj/error.hpp"
#include "convtraj/polytope.hpp"
#include "convtraj/sampler.hpp"

namespace convtraj {

struct FaceTuple {
  std::vector<int> vertices;  // representatives followed by padding
  int padding = 0;            // trailing entries added to reach the patch dimension
  Eigen::VectorXd normal;
  int source_facet = -1;

  /// Representatives without padding; the geometric face.
  std::vector<int> geometric() const {
    return {vertices.begin(), vertices.end() - padding};
  }
};

struct Patch {
  int k = 0;
  int component_id = 0;
  std::vector<FaceTuple> faces;
  std::vector<int> facets;  // hull facets of the component
  bool padded = false;
};

struct PatchReport {
  int dimension = 0;
  double delta = 0.0;
  std::vector<int> counts;  // counts[k] = number of k-patches
  std::vector<Patch> patches;
  std::vector<std::vector<int>> arcs;  // planar case: ordered hull vertex chains
  std::vector<int> flagged_facets;     // no representative set spans a face
  int unclassified_components = 0;
  bool suspicious = false;

  int count(int k) const {
    return k >= 0 && k < static_cast<int>(counts.size()) ? counts[static_cast<std::size_t>(k)] : 0;
  }
};

/// Euclidean distance from x to conv(pts) by Wolfe's minimum-norm-point method.
inline double point_polytope_distance(const Eigen::VectorXd& x, const std::vector<Eigen::VectorXd>& pts) {
  if (pts.empty()) throw bad_input("distance to an empty point set");
  std::vector<Eigen::VectorXd> p;
  p.reserve(pts.size());
  double scale = 0.0;
  for (const auto& q : pts) {
    p.push_back(q - x);
    scale = std::max(scale, p.back().squaredNorm());
  }
  const double tol = 1e-14 * std::max(scale, 1e-300);

  std::size_t first = 0;
  for (std::size_t i = 1; i < p.size(); ++i)
    if (p[i].squaredNorm() < p[first].squaredNorm()) first = i;
  std::vector<std::size_t> S{first};
  std::vector<double> w{1.0};

  auto current = [&] {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(x.size());
    for (std::size_t i = 0; i < S.size(); ++i) y += w[i] * p[S[i]];
    return y;
  };

  for (int outer = 0; outer < 1000; ++outer) {
    const Eigen::VectorXd y = current();
    std::size_t j = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double d = p[i].dot(y);
      if (d < best) { best = d; j = i; }
    }
    if (y.squaredNorm() - best <= tol || std::find(S.begin(), S.end(), j) != S.end()) return y.norm();
    S.push_back(j);
    w.push_back(0.0);
    for (int minor = 0; minor < 1000; ++minor) {
      const auto m = static_cast<Eigen::Index>(S.size());
      Eigen::MatrixXd K = Eigen::MatrixXd::Zero(m + 1, m + 1);
      for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) K(a, b) = p[S[static_cast<std::size_t>(a)]].dot(p[S[static_cast<std::size_t>(b)]]);
        K(a, m) = K(m, a) = 1.0;
      }
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
      rhs(m) = 1.0;
      const Eigen::VectorXd alpha = K.completeOrthogonalDecomposition().solve(rhs).head(m);
      if ((alpha.array() > 1e-15).all()) {
        for (Eigen::Index a = 0; a < m; ++a) w[static_cast<std::size_t>(a)] = alpha(a);
        break;
      }
      double theta = 1.0;
      for (Eigen::Index a = 0; a < m; ++a) {
        const double wa = w[static_cast<std::size_t>(a)];
        if (alpha(a) <= 1e-15 && wa - alpha(a) > 0) theta = std::min(theta, wa / (wa - alpha(a)));
      }
      std::vector<std::size_t> S2;
      std::vector<double> w2;
      for (Eigen::Index a = 0; a < m; ++a) {
        const double v = theta * alpha(a) + (1 - theta) * w[static_cast<std::size_t>(a)];
        if (v > 1e-15) {
          S2.push_back(S[static_cast<std::size_t>(a)]);
          w2.push_back(v);
        }
      }
      if (S2.empty()) {  // numerical breakdown, keep the best single point
        S2.push_back(S.front());
        w2.push_back(1.0);
      }
      const double total = std::accumulate(w2.begin(), w2.end(), 0.0);
      for (auto& v : w2) v /= total;
      S = std::move(S2);
      w = std::move(w2);
    }
  }
  return current().norm();
}

/**
 * Hausdorff distance between conv(A) and conv(B). Distance to a convex set is
 * convex, so each directed part is attained at a vertex.
 */
inline double hausdorff_facets(const std::vector<Eigen::VectorXd>& A, const std::vector<Eigen::VectorXd>& B) {
  if (A.empty() || B.empty()) throw bad_input("Hausdorff distance of an empty set");
  double h = 0.0;
  for (const auto& a : A) h = std::max(h, point_polytope_distance(a, B));
  for (const auto& b : B) h = std::max(h, point_polytope_distance(b, A));
  return h;
}

/**
 * Single-linkage clusters at threshold delta. Each cluster lists its members
 * ordered by the sum of distances to the other members, so front() is the
 * representative.
 */
inline std::vector<std::vector<int>> proximity_clusters(const std::vector<Eigen::VectorXd>& pts, double delta) {
  const int m = static_cast<int>(pts.size());
  std::vector<int> parent(static_cast<std::size_t>(m));
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) {
    while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
    return a;
  };
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      if ((pts[static_cast<std::size_t>(i)] - pts[static_cast<std::size_t>(j)]).norm() <= delta)
        parent[static_cast<std::size_t>(find(i))] = find(j);
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < m; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<int>> out;
  for (auto& [root, members] : groups) {
    std::vector<std::pair<double, int>> ranked;
    for (int a : members) {
      double s = 0.0;
      for (int b : members) s += (pts[static_cast<std::size_t>(a)] - pts[static_cast<std::size_t>(b)]).norm();
      ranked.emplace_back(s, a);
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<int> c;
    for (const auto& r : ranked) c.push_back(r.second);
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

/// True iff the vertex set U is exactly the vertex set of a face of the hull.
inline bool spans_face(const PolytopeData& hull, const std::vector<std::vector<int>>& vertex_facets, std::vector<int> U) {
  std::sort(U.begin(), U.end());
  std::vector<int> facets = vertex_facets[static_cast<std::size_t>(U.front())];
  for (std::size_t i = 1; i < U.size() && !facets.empty(); ++i) {
    const auto& f2 = vertex_facets[static_cast<std::size_t>(U[i])];
    std::vector<int> tmp;
    std::set_intersection(facets.begin(), facets.end(), f2.begin(), f2.end(), std::back_inserter(tmp));
    facets = std::move(tmp);
  }
  if (facets.empty()) return false;
  std::vector<int> closure = hull.facets[static_cast<std::size_t>(facets.front())].vertices;
  for (std::size_t i = 1; i < facets.size(); ++i) {
    const auto& v2 = hull.facets[static_cast<std::size_t>(facets[i])].vertices;
    std::vector<int> tmp;
    std::set_intersection(closure.begin(), closure.end(), v2.begin(), v2.end(), std::back_inserter(tmp));
    closure = std::move(tmp);
  }
  return closure == U;
}

struct FacetFace {
  FaceTuple tuple;
  int k = 0;
  std::vector<std::vector<int>> clusters;  // hull vertex ids, representative first
};

/**
 * Representatives of the delta-clusters of a facet's vertices such that
 * conv(U) is a face. Cluster members are tried in rank order; the first
 * combination passing the face test wins.
 */
inline std::optional<FacetFace> facet_face(const PolytopeData& hull, const std::vector<std::vector<int>>& vertex_facets,
                                           int facet, double delta) {
  const auto& F = hull.facets[static_cast<std::size_t>(facet)];
  std::vector<Eigen::VectorXd> pts;
  for (int v : F.vertices) pts.push_back(hull.vertices[static_cast<std::size_t>(v)]);
  auto local = proximity_clusters(pts, delta);
  FacetFace out;
  for (const auto& c : local) {
    std::vector<int> ids;
    for (int i : c) ids.push_back(F.vertices[static_cast<std::size_t>(i)]);
    out.clusters.push_back(std::move(ids));
  }
  const std::size_t m = out.clusters.size();
  // Enumerate index tuples in order of increasing rank sum.
  std::vector<std::size_t> limit(m);
  std::size_t max_rank = 0;
  for (std::size_t i = 0; i < m; ++i) {
    limit[i] = std::min<std::size_t>(out.clusters[i].size(), 4);
    max_rank += limit[i] - 1;
  }
  std::vector<std::size_t> idx(m, 0);
  int tried = 0;
  for (std::size_t total = 0; total <= max_rank && tried < 512; ++total) {
    std::function<bool(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t left) -> bool {
      if (pos == m) {
        if (left != 0) return false;
        ++tried;
        std::vector<int> U;
        for (std::size_t i = 0; i < m; ++i) U.push_back(out.clusters[i][idx[i]]);
        if (!spans_face(hull, vertex_facets, U)) return false;
        out.tuple.vertices = U;
        return true;
      }
      for (std::size_t r = 0; r < limit[pos] && r <= left; ++r) {
        idx[pos] = r;
        if (rec(pos + 1, left - r)) return true;
      }
      return false;
    };
    if (rec(0, total)) {
      std::vector<Eigen::VectorXd> up;
      for (int v : out.tuple.vertices) up.push_back(hull.vertices[static_cast<std::size_t>(v)]);
      const double scale = detail::coordinate_scale(hull.vertices);
      out.k = detail::affine_rank(up, 1e-7 * scale);
      out.tuple.normal = F.normal;
      out.tuple.source_facet = facet;
      return out;
    }
  }
  return std::nullopt;
}

/**
 * Pairs of facets sharing a ridge together with the smallest delta at which
 * they are joined in the facet graph: max of the normal distance and the
 * Hausdorff distance.
 */
struct FacetLink {
  int a = 0, b = 0;
  double normal_distance = 0.0;
  double hausdorff = 0.0;
  double threshold() const { return std::max(normal_distance, hausdorff); }
};

inline std::vector<FacetLink> facet_links(const PolytopeData& hull) {
  const int n = hull.dimension;
  const double rank_tol = 1e-9 * detail::coordinate_scale(hull.vertices);
  std::vector<FacetLink> out;
  const auto vf = hull.vertex_facets();
  std::set<std::pair<int, int>> seen;
  for (const auto& list : vf) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      for (std::size_t j = i + 1; j < list.size(); ++j) {
        const int a = list[i], b = list[j];
        if (!seen.insert({a, b}).second) continue;
        const auto& Fa = hull.facets[static_cast<std::size_t>(a)];
        const auto& Fb = hull.facets[static_cast<std::size_t>(b)];
        std::vector<int> common;
        std::set_intersection(Fa.vertices.begin(), Fa.vertices.end(), Fb.vertices.begin(), Fb.vertices.end(),
                              std::back_inserter(common));
        if (static_cast<int>(common.size()) < n - 1) continue;
        std::vector<Eigen::VectorXd> cp;
        for (int v : common) cp.push_back(hull.vertices[static_cast<std::size_t>(v)]);
        if (detail::affine_rank(cp, rank_tol) != n - 2) continue;
        std::vector<Eigen::VectorXd> pa, pb;
        for (int v : Fa.vertices) pa.push_back(hull.vertices[static_cast<std::size_t>(v)]);
        for (int v : Fb.vertices) pb.push_back(hull.vertices[static_cast<std::size_t>(v)]);
        out.push_back({a, b, (Fa.normal - Fb.normal).norm(), hausdorff_facets(pa, pb)});
      }
    }
  }
  return out;
}

/// Adjacency lists of the facet graph at threshold delta.
inline std::vector<std::vector<int>> facet_graph(const PolytopeData& hull, double delta,
                                                 const std::vector<FacetLink>* links = nullptr) {
  if (hull.dimension < 3) throw bad_input("facet graph needs dimension at least 3");
  std::vector<FacetLink> own;
  if (links == nullptr) {
    own = facet_links(hull);
    links = &own;
  }
  std::vector<std::vector<int>> g(hull.facets.size());
  for (const auto& l : *links) {
    if (l.threshold() <= delta) {
      g[static_cast<std::size_t>(l.a)].push_back(l.b);
      g[static_cast<std::size_t>(l.b)].push_back(l.a);
    }
  }
  for (auto& a : g) std::sort(a.begin(), a.end());
  return g;
}

inline std::vector<std::vector<int>> connected_components(const std::vector<std::vector<int>>& g) {
  std::vector<int> label(g.size(), -1);
  std::vector<std::vector<int>> comps;
  for (std::size_t s = 0; s < g.size(); ++s) {
    if (label[s] >= 0) continue;
    const int id = static_cast<int>(comps.size());
    comps.emplace_back();
    std::vector<int> stack{static_cast<int>(s)};
    label[s] = id;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      comps.back().push_back(u);
      for (int w : g[static_cast<std::size_t>(u)]) {
        if (label[static_cast<std::size_t>(w)] < 0) {
          label[static_cast<std::size_t>(w)] = id;
          stack.push_back(w);
        }
      }
    }
    std::sort(comps.back().begin(), comps.back().end());
  }
  return comps;
}

/// Planar case: arcs are chains of hull edges no longer than delta, the rest are edges of the curve's hull.
inline PatchReport detect_arcs_edges_2d(const CurveSample& sample, const PolytopeData& hull, double delta) {
  if (hull.dimension != 2) throw bad_input("arc/edge detection needs a planar hull");
  if (!(delta > 0)) throw bad_input("delta must be positive");
  (void)sample;
  const std::size_t m = hull.facets.size();
  std::vector<double> len(m);
  for (std::size_t f = 0; f < m; ++f) {
    const auto& v = hull.facets[f].vertices;
    len[f] = (hull.vertices[static_cast<std::size_t>(v[0])] - hull.vertices[static_cast<std::size_t>(v[1])]).norm();
  }
  std::vector<std::vector<int>> g(m);
  const auto vf = hull.vertex_facets();
  for (const auto& list : vf) {
    if (list.size() != 2) continue;
    const int a = list[0], b = list[1];
    if (len[static_cast<std::size_t>(a)] <= delta && len[static_cast<std::size_t>(b)] <= delta) {
      g[static_cast<std::size_t>(a)].push_back(b);
      g[static_cast<std::size_t>(b)].push_back(a);
    }
  }
  PatchReport r;
  r.dimension = 2;
  r.delta = delta;
  r.counts.assign(2, 0);
  r.suspicious = std::all_of(len.begin(), len.end(), [&](double l) { return l > delta; });
  int cid = 0;
  for (const auto& comp : connected_components(g)) {
    if (comp.size() == 1 && g[static_cast<std::size_t>(comp[0])].empty()) {
      const auto& F = hull.facets[static_cast<std::size_t>(comp[0])];
      Patch p;
      p.k = 1;
      p.component_id = cid++;
      p.facets = comp;
      p.faces.push_back({F.vertices, 0, F.normal, comp[0]});
      r.patches.push_back(std::move(p));
      ++r.counts[1];
      continue;
    }
    // Order the chain: start from an end (a vertex used once) when open.
    std::map<int, std::vector<int>> vadj;
    for (int f : comp) {
      const auto& v = hull.facets[static_cast<std::size_t>(f)].vertices;
      vadj[v[0]].push_back(v[1]);
      vadj[v[1]].push_back(v[0]);
    }
    int start = vadj.begin()->first;
    for (const auto& [v, nb] : vadj)
      if (nb.size() == 1) { start = v; break; }
    std::vector<int> chain{start};
    int prev = -1, cur = start;
    while (true) {
      int next = -1;
      for (int w : vadj[cur])
        if (w != prev && (chain.size() < 2 || w != chain.front() || vadj[cur].size() == 1)) { next = w; break; }
      if (next < 0 || next == start) break;
      chain.push_back(next);
      prev = cur;
      cur = next;
    }
    r.arcs.push_back(std::move(chain));
    ++r.counts[0];
    ++cid;
  }
  return r;
}

/// Patch detection for dimension three and up.
inline PatchReport detect_patches(const PolytopeData& hull, double delta, const std::vector<FacetLink>* links = nullptr) {
  const int n = hull.dimension;
  if (n < 3) throw bad_input("patch detection needs dimension at least 3");
  if (!(delta > 0)) throw bad_input("delta must be positive");
  const auto g = facet_graph(hull, delta, links);
  const auto vf = hull.vertex_facets();
  PatchReport r;
  r.dimension = n;
  r.delta = delta;
  r.counts.assign(static_cast<std::size_t>(n), 0);

  std::vector<std::optional<FacetFace>> ff(hull.facets.size());
  for (std::size_t f = 0; f < hull.facets.size(); ++f) {
    ff[f] = facet_face(hull, vf, static_cast<int>(f), delta);
    if (!ff[f]) r.flagged_facets.push_back(static_cast<int>(f));
  }

  int cid = 0;
  for (const auto& comp : connected_components(g)) {
    int k = -1;
    for (int f : comp)
      if (ff[static_cast<std::size_t>(f)]) k = std::max(k, ff[static_cast<std::size_t>(f)]->k);
    if (k < 0) {
      ++r.unclassified_components;
      continue;
    }
    Patch p;
    p.k = k;
    p.component_id = cid++;
    p.facets = comp;
    for (int f : comp) {
      if (!ff[static_cast<std::size_t>(f)]) continue;
      FacetFace& face = *ff[static_cast<std::size_t>(f)];
      FaceTuple t = face.tuple;
      // Pad lower-dimensional tuples with the next-ranked member of the largest cluster.
      while (face.k < k && static_cast<int>(t.vertices.size()) < k + 1) {
        int add = -1;
        std::size_t best_size = 1;
        for (const auto& c : face.clusters) {
          if (c.size() <= best_size) continue;
          for (int v : c) {
            if (std::find(t.vertices.begin(), t.vertices.end(), v) == t.vertices.end()) {
              add = v;
              best_size = c.size();
              break;
            }
          }
        }
        if (add < 0) break;
        t.vertices.push_back(add);
        ++t.padding;
        ++face.k;
        p.padded = true;
      }
      p.faces.push_back(std::move(t));
    }
    ++r.counts[static_cast<std::size_t>(k)];
    r.patches.push_back(std::move(p));
  }
  return r;
}

/// One grid point of a delta scan.
struct DeltaProbe {
  double delta = 0.0;
  std::vector<int> counts;
};

struct PlateauResult {
  double delta = 0.0;  // geometric centre of the chosen run
  double lo = 0.0, hi = 0.0;
  bool stable = false;  // the full count vector is constant over a factor two
  std::vector<DeltaProbe> probes;
  PatchReport report;
};

/**
 * Scans a geometric delta grid for a stable classification. Counts are
 * compared from the top dimension down: the longest run on which the highest
 * nonzero count is constant is kept, then narrowed to the longest run of the
 * next count inside it, down to k = 1. The last run of the grid, where
 * everything merges into one component, is excluded.
 */
inline PlateauResult plateau_scan(const std::function<PatchReport(double)>& detect, double delta_min, double delta_max,
                                  int steps = 40) {
  if (!(delta_min > 0) || !(delta_max > delta_min) || steps < 2) throw bad_input("invalid delta grid");
  PlateauResult out;
  for (int i = 0; i < steps; ++i) {
    const double d = delta_min * std::pow(delta_max / delta_min, static_cast<double>(i) / (steps - 1));
    out.probes.push_back({d, detect(d).counts});
  }
  const auto count = [&](std::size_t i, int k) {
    const auto& c = out.probes[i].counts;
    return k < static_cast<int>(c.size()) ? c[static_cast<std::size_t>(k)] : 0;
  };
  const auto same_from = [&](std::size_t i, std::size_t j, int k) {
    for (int m = k; m < static_cast<int>(std::max(out.probes[i].counts.size(), out.probes[j].counts.size())); ++m)
      if (count(i, m) != count(j, m)) return false;
    return true;
  };
  // The merged tail: the run reaching the top of the grid.
  std::size_t end = out.probes.size() - 1;
  while (end > 0 && same_from(end - 1, out.probes.size() - 1, 1)) --end;
  if (end == 0) end = out.probes.size();
  const auto span = [&](std::size_t a, std::size_t b) { return out.probes[b].delta / out.probes[a].delta; };

  std::size_t lo = 0, hi = end - 1;
  int top = 0;
  for (std::size_t i = lo; i <= hi; ++i)
    for (int k = 1; k < static_cast<int>(out.probes[i].counts.size()); ++k)
      if (count(i, k) > 0) top = std::max(top, k);
  for (int k = top; k >= 1; --k) {
    std::size_t best_a = lo, best_b = lo;
    bool have = false;
    for (std::size_t i = lo; i <= hi;) {
      std::size_t j = i;
      while (j + 1 <= hi && same_from(i, j + 1, k)) ++j;
      const bool nonzero = k < top || count(i, k) > 0;
      if (nonzero && (!have || span(i, j) > span(best_a, best_b))) {
        best_a = i;
        best_b = j;
        have = true;
      }
      i = j + 1;
    }
    if (!have) break;
    lo = best_a;
    hi = best_b;
  }
  out.lo = out.probes[lo].delta;
  out.hi = out.probes[hi].delta;
  out.stable = span(lo, hi) >= 2.0 - 1e-12;
  out.delta = std::sqrt(out.lo * out.hi);
  out.report = detect(out.delta);
  return out;
}

/// Default threshold: three times the largest consecutive sample gap.
inline double default_delta(const CurveSample& s) { return 3.0 * max_consecutive_gap(s); }

}  // namespace convtraj
