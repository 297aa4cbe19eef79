#pragma once
/**
 * Coupled V- and H-representation of a full-dimensional polytope with
 * facet-vertex incidence and the vertex graph.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

#include "convtraj/error.hpp"

namespace convtraj {

struct Facet {
  Eigen::VectorXd normal;    // outward, unit length
  double offset = 0.0;       // polytope lies in normal . x <= offset
  std::vector<int> vertices; // indices into PolytopeData::vertices, ascending
};

struct PolytopeData {
  int dimension = 0;
  std::vector<Eigen::VectorXd> vertices;
  std::vector<int> source;  // index of each vertex in the input point list
  std::vector<Facet> facets;
  std::vector<std::vector<int>> adjacency;  // sorted neighbour lists
  double eps = 1e-9;

  std::size_t edge_count() const {
    std::size_t s = 0;
    for (const auto& a : adjacency) s += a.size();
    return s / 2;
  }
  std::size_t incidence_nonzeros() const {
    std::size_t s = 0;
    for (const auto& f : facets) s += f.vertices.size();
    return s;
  }
  std::size_t adjacency_nonzeros() const { return 2 * edge_count(); }

  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> incidence_matrix() const {
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> m =
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(static_cast<Eigen::Index>(facets.size()),
                                                                       static_cast<Eigen::Index>(vertices.size()), false);
    for (std::size_t f = 0; f < facets.size(); ++f)
      for (int v : facets[f].vertices) m(static_cast<Eigen::Index>(f), v) = true;
    return m;
  }
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adjacency_matrix() const {
    const auto nv = static_cast<Eigen::Index>(vertices.size());
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> m =
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(nv, nv, false);
    for (std::size_t v = 0; v < adjacency.size(); ++v)
      for (int w : adjacency[v]) m(static_cast<Eigen::Index>(v), w) = true;
    return m;
  }

  /// Facets containing each vertex.
  std::vector<std::vector<int>> vertex_facets() const {
    std::vector<std::vector<int>> out(vertices.size());
    for (std::size_t f = 0; f < facets.size(); ++f)
      for (int v : facets[f].vertices) out[static_cast<std::size_t>(v)].push_back(static_cast<int>(f));
    return out;
  }

  /// Largest violation of a facet inequality by x (negative inside).
  double max_violation(const Eigen::VectorXd& x) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& f : facets) worst = std::max(worst, f.normal.dot(x) - f.offset);
    return worst;
  }
};

namespace detail {

inline double coordinate_scale(const std::vector<Eigen::VectorXd>& pts) {
  double s = 0.0;
  for (const auto& p : pts) s = std::max(s, p.cwiseAbs().maxCoeff());
  return std::max(s, 1.0);
}

/// Affine rank of a point set, relative threshold on singular values.
inline int affine_rank(const std::vector<Eigen::VectorXd>& pts, double tol) {
  if (pts.size() <= 1) return 0;
  Eigen::MatrixXd M(static_cast<Eigen::Index>(pts.size() - 1), pts.front().size());
  for (std::size_t i = 1; i < pts.size(); ++i) M.row(static_cast<Eigen::Index>(i - 1)) = (pts[i] - pts[0]).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) r += svd.singularValues()(i) > tol ? 1 : 0;
  return r;
}

inline int matrix_rank(const Eigen::MatrixXd& M, double tol) {
  if (M.rows() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) r += svd.singularValues()(i) > tol ? 1 : 0;
  return r;
}

}  // namespace detail

/**
 * Builds PolytopeData from a vertex set and candidate outward directions.
 *
 * Each candidate is pushed to a supporting hyperplane, its near-incident
 * vertices (within candidate_tol) are refitted by least squares, and the result
 * is kept only if it is flush: at least n incident vertices of affine rank n-1
 * within eps * scale. Candidates with equal incident sets collapse into one
 * facet, which also merges coplanar simplices.
 */
inline PolytopeData finalize_polytope(std::vector<Eigen::VectorXd> vertices, std::vector<int> source,
                                      const std::vector<Eigen::VectorXd>& candidates, double eps,
                                      double candidate_tol_factor = 1.0) {
  PolytopeData P;
  if (vertices.empty()) throw bad_input("polytope: no vertices");
  const int n = static_cast<int>(vertices.front().size());
  P.dimension = n;
  P.eps = eps;

  // Deterministic vertex order: by input index.
  std::vector<std::size_t> order(vertices.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return source[a] < source[b]; });
  for (std::size_t i : order) {
    P.vertices.push_back(vertices[i]);
    P.source.push_back(source[i]);
  }
  const auto& V = P.vertices;
  const double scale = detail::coordinate_scale(V);
  const double tol = eps * scale;
  const double ctol = std::max(tol, tol * candidate_tol_factor);

  auto support = [&](const Eigen::VectorXd& nrm, double t) {
    double g = -std::numeric_limits<double>::infinity();
    for (const auto& v : V) g = std::max(g, nrm.dot(v));
    std::vector<int> inc;
    for (std::size_t i = 0; i < V.size(); ++i) {
      if (g - nrm.dot(V[i]) <= t) inc.push_back(static_cast<int>(i));
    }
    return std::make_pair(g, inc);
  };
  auto rank_of = [&](const std::vector<int>& I) {
    std::vector<Eigen::VectorXd> pts;
    for (int i : I) pts.push_back(V[static_cast<std::size_t>(i)]);
    return detail::affine_rank(pts, tol);
  };
  Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
  for (const auto& v : V) centroid += v / static_cast<double>(V.size());

  // Rotates the supporting plane nrm about the face F in direction d until it
  // touches a vertex off F. Returns false if no vertex limits the rotation.
  auto rotate = [&](Eigen::VectorXd& nrm, const std::vector<int>& F, Eigen::VectorXd d) {
    const Eigen::VectorXd& f0 = V[static_cast<std::size_t>(F.front())];
    std::vector<Eigen::VectorXd> basis{nrm};
    for (int i : F) basis.push_back(V[static_cast<std::size_t>(i)] - f0);
    for (const auto& b : basis) {  // Gram-Schmidt against nrm and the face directions
      Eigen::VectorXd e = b;
      if (e.norm() <= tol) continue;
      e.normalize();
      d -= d.dot(e) * e;
    }
    // Second pass removes leftovers from non-orthogonal face directions.
    Eigen::MatrixXd Fm(n, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t j = 0; j < basis.size(); ++j) Fm.col(static_cast<Eigen::Index>(j)) = basis[j];
    const Eigen::MatrixXd Q = Fm.colPivHouseholderQr().householderQ();
    const int r = detail::matrix_rank(Fm.transpose(), tol);
    d -= Q.leftCols(r) * (Q.leftCols(r).transpose() * d);
    if (d.norm() <= 1e-12) return false;
    d.normalize();
    double mu = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < V.size(); ++i) {
      const double a = d.dot(V[i] - f0);
      if (a <= tol) continue;
      mu = std::min(mu, std::max(0.0, -nrm.dot(V[i] - f0)) / a);
    }
    if (!std::isfinite(mu)) return false;
    nrm = (nrm + mu * d).normalized();
    return true;
  };

  // Pushes a direction to a facet: wrap about the contact face until it has
  // rank n-1, then refit the plane on the incident vertices.
  auto to_facet = [&](Eigen::VectorXd nrm, double first_tol) -> std::optional<Facet> {
    nrm.normalize();
    for (int pass = 0; pass < n + 4; ++pass) {
      auto [g, I] = support(nrm, pass == 0 ? first_tol : tol);
      if (rank_of(I) < n - 1) {
        if (!rotate(nrm, I, centroid - V[static_cast<std::size_t>(I.front())])) return std::nullopt;
        continue;
      }
      Eigen::MatrixXd M(static_cast<Eigen::Index>(I.size()), n);
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
      for (int i : I) mean += V[static_cast<std::size_t>(i)];
      mean /= static_cast<double>(I.size());
      for (std::size_t r = 0; r < I.size(); ++r)
        M.row(static_cast<Eigen::Index>(r)) = (V[static_cast<std::size_t>(I[r])] - mean).transpose();
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
      Eigen::VectorXd refit = svd.matrixV().col(n - 1);
      if (refit.dot(nrm) < 0) refit = -refit;
      const bool stable = (refit - nrm).norm() < 1e-14;
      nrm = refit;
      auto [gamma, inc] = support(nrm, tol);
      if (static_cast<int>(inc.size()) >= n && rank_of(inc) == n - 1 && (stable || pass > 1))
        return Facet{nrm, gamma, inc};
    }
    return std::nullopt;
  };

  std::map<std::vector<int>, Facet> found;
  for (const auto& cand : candidates) {
    if (cand.size() != n || !(cand.norm() > 0)) continue;
    auto f = to_facet(cand, ctol);
    if (f && !found.count(f->vertices)) found.emplace(f->vertices, std::move(*f));
  }

  // Facet completion: every ridge lies in exactly two facets. Ridges are known
  // for simplices, for polygons (n = 3) and for edges (n = 2); an open ridge is
  // closed by rotating its facet's plane about it.
  auto ridges_of = [&](const Facet& f) {
    std::vector<std::vector<int>> out;
    const auto& I = f.vertices;
    if (static_cast<int>(I.size()) == n) {
      for (std::size_t skip = 0; skip < I.size(); ++skip) {
        std::vector<int> r;
        for (std::size_t j = 0; j < I.size(); ++j)
          if (j != skip) r.push_back(I[j]);
        out.push_back(std::move(r));
      }
    } else if (n == 3) {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
      for (int i : I) c += V[static_cast<std::size_t>(i)] / static_cast<double>(I.size());
      const Eigen::Vector3d nz = f.normal;
      Eigen::Vector3d e1 = (V[static_cast<std::size_t>(I[0])] - c);
      e1 = (e1 - e1.dot(nz) * nz).normalized();
      const Eigen::Vector3d e2 = nz.cross(e1);
      std::vector<std::pair<double, int>> ang;
      for (int i : I) {
        const Eigen::Vector3d q = V[static_cast<std::size_t>(i)] - c;
        ang.emplace_back(std::atan2(q.dot(e2), q.dot(e1)), i);
      }
      std::sort(ang.begin(), ang.end());
      // Drop points in the relative interior of polygon sides.
      std::vector<int> poly;
      for (std::size_t j = 0; j < ang.size(); ++j) {
        const auto& a = V[static_cast<std::size_t>(ang[(j + ang.size() - 1) % ang.size()].second)];
        const auto& b = V[static_cast<std::size_t>(ang[j].second)];
        const auto& d = V[static_cast<std::size_t>(ang[(j + 1) % ang.size()].second)];
        const Eigen::Vector3d u = b - a, w = d - b;
        if (u.cross(w).norm() > tol * std::max(1.0, u.norm() + w.norm())) poly.push_back(ang[j].second);
      }
      for (std::size_t j = 0; j < poly.size(); ++j) {
        std::vector<int> r{poly[j], poly[(j + 1) % poly.size()]};
        std::sort(r.begin(), r.end());
        out.push_back(std::move(r));
      }
    }
    return out;
  };
  {
    std::map<std::vector<int>, std::vector<std::vector<int>>> ridge_facets;  // ridge -> facet keys
    std::vector<std::vector<int>> queue;
    for (const auto& [key, f] : found) queue.push_back(key);
    std::size_t processed = 0;
    const std::size_t limit = 20 * V.size() + 100;
    while (processed < queue.size() && found.size() < limit) {
      const auto key = queue[processed++];
      for (auto& r : ridges_of(found.at(key))) ridge_facets[r].push_back(key);
      if (processed < queue.size()) continue;
      // All queued facets registered: close open ridges.
      for (const auto& [r, fs] : ridge_facets) {
        if (fs.size() != 1) continue;
        const Facet& f = found.at(fs.front());
        Eigen::VectorXd nrm = f.normal;
        int other = -1;
        for (int i : f.vertices)
          if (!std::binary_search(r.begin(), r.end(), i)) { other = i; break; }
        if (other < 0) continue;
        const Eigen::VectorXd& r0 = V[static_cast<std::size_t>(r.front())];
        if (!rotate(nrm, r, -(V[static_cast<std::size_t>(other)] - r0))) continue;
        auto g = to_facet(nrm, tol);
        if (g && !found.count(g->vertices)) {
          queue.push_back(g->vertices);
          found.emplace(g->vertices, std::move(*g));
        }
      }
    }
  }
  // Facets whose incident set is strictly contained in another facet's set are
  // tolerance artefacts of the same hyperplane.
  std::vector<Facet> facets;
  for (auto& [key, f] : found) facets.push_back(std::move(f));
  std::vector<char> drop(facets.size(), 0);
  for (std::size_t a = 0; a < facets.size(); ++a) {
    for (std::size_t b = 0; b < facets.size(); ++b) {
      if (a == b || drop[b] || facets[a].vertices.size() >= facets[b].vertices.size()) continue;
      if (std::includes(facets[b].vertices.begin(), facets[b].vertices.end(), facets[a].vertices.begin(),
                        facets[a].vertices.end())) {
        drop[a] = 1;
        break;
      }
    }
  }
  for (std::size_t f = 0; f < facets.size(); ++f) {
    if (!drop[f]) P.facets.push_back(std::move(facets[f]));
  }
  std::sort(P.facets.begin(), P.facets.end(), [](const Facet& a, const Facet& b) { return a.vertices < b.vertices; });

  // A vertex is extreme iff the normals of its facets span R^n. Points in the
  // relative interior of a face (e.g. a corner of two merged coplanar
  // simplices) are removed and the facets recomputed.
  {
    const auto vf0 = P.vertex_facets();
    std::vector<Eigen::VectorXd> keep_v;
    std::vector<int> keep_s;
    for (std::size_t v = 0; v < V.size(); ++v) {
      Eigen::MatrixXd N(static_cast<Eigen::Index>(vf0[v].size()), n);
      for (std::size_t r = 0; r < vf0[v].size(); ++r)
        N.row(static_cast<Eigen::Index>(r)) = P.facets[static_cast<std::size_t>(vf0[v][r])].normal.transpose();
      if (detail::matrix_rank(N, 1e-9) == n) {
        keep_v.push_back(V[v]);
        keep_s.push_back(P.source[v]);
      }
    }
    if (keep_v.size() < V.size()) {
      if (static_cast<int>(keep_v.size()) <= n) throw numerical("polytope: too few extreme vertices");
      std::vector<Eigen::VectorXd> cand;
      for (const auto& f : P.facets) cand.push_back(f.normal);
      for (const auto& c : candidates) cand.push_back(c);
      return finalize_polytope(std::move(keep_v), std::move(keep_s), cand, eps, candidate_tol_factor);
    }
  }

  // Vertex graph: u, w adjacent iff the normals of their common facets have rank n-1.
  const auto vf = P.vertex_facets();
  std::vector<std::set<int>> adj(V.size());
  for (const auto& f : P.facets) {
    for (std::size_t i = 0; i < f.vertices.size(); ++i) {
      for (std::size_t j = i + 1; j < f.vertices.size(); ++j) {
        const int a = f.vertices[i], b = f.vertices[j];
        if (adj[static_cast<std::size_t>(a)].count(b)) continue;
        std::vector<int> common;
        std::set_intersection(vf[static_cast<std::size_t>(a)].begin(), vf[static_cast<std::size_t>(a)].end(),
                              vf[static_cast<std::size_t>(b)].begin(), vf[static_cast<std::size_t>(b)].end(),
                              std::back_inserter(common));
        if (static_cast<int>(common.size()) < n - 1) continue;
        Eigen::MatrixXd N(static_cast<Eigen::Index>(common.size()), n);
        for (std::size_t r = 0; r < common.size(); ++r)
          N.row(static_cast<Eigen::Index>(r)) = P.facets[static_cast<std::size_t>(common[r])].normal.transpose();
        if (detail::matrix_rank(N, 1e-9) == n - 1) {
          adj[static_cast<std::size_t>(a)].insert(b);
          adj[static_cast<std::size_t>(b)].insert(a);
        }
      }
    }
  }
  for (const auto& s : adj) P.adjacency.emplace_back(s.begin(), s.end());
  return P;
}

/// Removes points closer than tol to an earlier point; returns kept indices.
inline std::vector<int> dedupe_points(const std::vector<Eigen::VectorXd>& pts, double tol) {
  std::vector<int> order(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return pts[static_cast<std::size_t>(a)](0) < pts[static_cast<std::size_t>(b)](0) ||
           (pts[static_cast<std::size_t>(a)](0) == pts[static_cast<std::size_t>(b)](0) && a < b);
  });
  std::vector<char> dead(pts.size(), 0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& p = pts[static_cast<std::size_t>(order[i])];
    if (dead[static_cast<std::size_t>(order[i])]) continue;
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const auto& q = pts[static_cast<std::size_t>(order[j])];
      if (q(0) - p(0) > tol) break;
      if ((q - p).norm() <= tol) {
        // keep the smaller index
        const int lose = std::max(order[i], order[j]);
        dead[static_cast<std::size_t>(lose)] = 1;
        if (lose == order[i]) break;
      }
    }
  }
  std::vector<int> kept;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!dead[i]) kept.push_back(static_cast<int>(i));
  }
  return kept;
}

}  // namespace convtraj
