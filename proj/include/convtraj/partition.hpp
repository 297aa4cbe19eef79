#pragma once
/**
 * Inward/outward partition of boundary faces under a polynomial vector field.
 *
 * On a face conv(u_0..u_k) with outward normal v the sign of
 * g(lambda) = phi(sum lambda_j u_j) . v decides whether trajectories leave the
 * hull. Edges are split exactly at the real roots of g; 2- and 3-faces are
 * sampled on a barycentric grid and contoured.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "convtraj/error.hpp"
#include "convtraj/patches.hpp"
#include "convtraj/poly.hpp"
#include "convtraj/systems.hpp"

namespace convtraj {

enum class Sign { Inward, Outward, Tangent };

inline const char* to_string(Sign s) {
  switch (s) {
    case Sign::Inward: return "inward";
    case Sign::Outward: return "outward";
    default: return "tangent";
  }
}

struct EdgePartition {
  Eigen::VectorXd u0, u1;  // point(lambda) = lambda * u0 + (1 - lambda) * u1
  Eigen::VectorXd normal;
  std::vector<double> breakpoints;  // ascending, inside (0, 1)
  std::vector<Sign> segment_signs;  // breakpoints.size() + 1 entries
  bool identically_zero = false;

  Eigen::VectorXd point(double lambda) const { return lambda * u0 + (1.0 - lambda) * u1; }
};

struct Region {
  Sign sign = Sign::Tangent;
  int nodes = 0;
  Eigen::VectorXd witness;  // barycentric coordinates of the node with the largest |g|
  double value = 0.0;
};

struct FacePartition {
  int k = 2;
  std::vector<Eigen::VectorXd> vertices;
  Eigen::VectorXd normal;
  int grid_res = 0;
  // Contour pieces in barycentric coordinates: polylines for k = 2, polygons for k = 3.
  std::vector<std::vector<Eigen::VectorXd>> zero_set;
  std::vector<Region> regions;
  bool identically_zero = false;

  Eigen::VectorXd point(const Eigen::VectorXd& bary) const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(vertices.front().size());
    for (std::size_t j = 0; j < vertices.size(); ++j) x += bary(static_cast<Eigen::Index>(j)) * vertices[j];
    return x;
  }
};

struct Witness {
  Eigen::VectorXd point;
  Eigen::VectorXd normal;
  double value = 0.0;  // phi(point) . normal
  int patch = -1;      // index into PartitionReport::patches
  int face = -1;       // face index within the patch
};

struct PatchPartition {
  int k = 0;
  int component_id = 0;
  std::vector<EdgePartition> edges;
  std::vector<FacePartition> faces;
  bool has_inward = false;
  bool has_outward = false;
  bool all_tangent = true;
  int skipped_faces = 0;  // point faces and non-simplicial 3-faces
};

struct PartitionReport {
  std::vector<PatchPartition> patches;
  std::vector<Witness> witnesses;
  bool forward_closed = true;
};

/**
 * Optional exact boundary surface f = 0. Faces contained in it (f vanishes
 * identically on the face, up to on_surface_tol on coefficients) are tested with the
 * gradient of f instead of the facet normal, so a field tangent to the surface
 * is recognised symbolically.
 */
struct SurfaceHook {
  Polynomial f;
  double on_surface_tol = 1e-9;
};

struct PartitionOptions {
  double rel_tol = 1e-9;  // band relative to the largest |phi| on the face
  double abs_tol = 0.0;
  int grid_res_2 = 100;
  int grid_res_3 = 40;
  bool vertex_band = true;  // treat residuals at the face vertices as error of the facet normal
  std::vector<SurfaceHook> hooks;
};

namespace detail {

inline double coefficient_norm(const Polynomial& p) {
  double m = 0.0;
  for (const auto& [e, c] : p.terms()) m = std::max(m, std::abs(c));
  return m;
}

inline double field_scale(const VectorField& phi, const std::vector<Eigen::VectorXd>& pts) {
  double s = 0.0;
  for (const auto& p : pts) s = std::max(s, phi.evaluate(p).norm());
  if (pts.size() >= 2) s = std::max(s, phi.evaluate(0.5 * (pts[0] + pts[1])).norm());
  return s;
}

/**
 * Angle between the facet normal and the tangent hyperplane measured at the
 * face vertices. They are curve points where phi is tangent to the curve, so
 * phi . v / |phi| there is the sampling error of v.
 */
inline double normal_error(const VectorField& phi, const std::vector<Eigen::VectorXd>& pts, const Eigen::VectorXd& v) {
  double scale = 0.0, eta = 0.0;
  std::vector<Eigen::VectorXd> f;
  for (const auto& u : pts) {
    f.push_back(phi.evaluate(u));
    scale = std::max(scale, f.back().norm());
  }
  for (const auto& fu : f)
    if (fu.norm() > 1e-6 * scale) eta = std::max(eta, std::abs(fu.dot(v)) / fu.norm());
  return eta;
}

inline Sign classify_value(double g, double band) {
  if (g > band) return Sign::Outward;
  if (g < -band) return Sign::Inward;
  return Sign::Tangent;
}

/// The polynomial phi . v, or the hook's gradient product when a hook applies.
/// Called with affinely independent vertices.
inline Polynomial normal_product(const VectorField& phi, const std::vector<Eigen::VectorXd>& verts,
                                 const Eigen::VectorXd& v, const std::vector<SurfaceHook>& hooks) {
  for (const auto& h : hooks) {
    // The face must lie inside the surface, not merely have its vertices on it.
    if (coefficient_norm(restrict_to_simplex(h.f, verts)) > h.on_surface_tol) continue;
    Eigen::VectorXd centre = Eigen::VectorXd::Zero(v.size());
    for (const auto& u : verts) centre += u / static_cast<double>(verts.size());
    Eigen::VectorXd grad(v.size());
    for (int j = 0; j < v.size(); ++j) grad(j) = h.f.partial_derivative(j).evaluate(centre);
    const double orient = grad.dot(v) >= 0 ? 1.0 : -1.0;
    return phi.dot_gradient(h.f) * orient;
  }
  return phi.dot(v);
}

/// Affine function of the simplex coordinates agreeing with g at the vertices.
inline Polynomial vertex_interpolant(const Polynomial& g) {
  const int k = g.dimension();
  const double g0 = g.evaluate(Eigen::VectorXd::Zero(k));
  Polynomial L = Polynomial::constant(k, g0);
  for (int j = 0; j < k; ++j) {
    std::vector<int> e(static_cast<std::size_t>(k), 0);
    e[static_cast<std::size_t>(j)] = 1;
    L.add_term(e, g.evaluate(Eigen::VectorXd::Unit(k, j)) - g0);
  }
  return L;
}

}  // namespace detail

/**
 * Splits the segment [u1, u0] at the zeros of phi . v. With eta > 0 the end
 * values are taken as errors of the normal v (the ends are curve points, where
 * phi is exactly tangent to the body): their linear interpolant is removed,
 * and what is left is trusted beyond twice eta times the departure of phi from
 * its own interpolant.
 */
inline EdgePartition classify_edge(const VectorField& phi, const Eigen::VectorXd& u0, const Eigen::VectorXd& u1,
                                   const Eigen::VectorXd& v, double tol, const std::vector<SurfaceHook>& hooks = {},
                                   double eta = 0.0) {
  if ((u0 - u1).norm() == 0.0) throw bad_input("classify_edge: degenerate segment");
  if (std::abs(v.norm() - 1.0) > 1e-9) throw bad_input("classify_edge: normal must be unit length");
  EdgePartition e{u0, u1, v, {}, {}, false};
  const std::vector<Eigen::VectorXd> ends{u1, u0};
  Polynomial g = restrict_to_simplex(detail::normal_product(phi, ends, v, hooks), ends);
  if (eta > 0) g -= detail::vertex_interpolant(g);
  const double band = std::max(tol, 0.0);
  if (detail::coefficient_norm(g) <= 1e-12 * std::max(1.0, detail::field_scale(phi, ends))) {
    e.identically_zero = true;
    e.segment_signs = {Sign::Tangent};
    return e;
  }
  const auto q = UnivariatePolynomial::from_polynomial(g);
  const Eigen::VectorXd f0 = phi.evaluate(u0), f1 = phi.evaluate(u1);
  for (const auto& r : real_roots_in_interval(q, 0.0, 1.0)) {
    if (r.value > 1e-12 && r.value < 1.0 - 1e-12) e.breakpoints.push_back(r.value);
  }
  std::vector<double> cuts{0.0};
  cuts.insert(cuts.end(), e.breakpoints.begin(), e.breakpoints.end());
  cuts.push_back(1.0);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    const double bend = (phi.evaluate(e.point(mid)) - mid * f0 - (1 - mid) * f1).norm();
    e.segment_signs.push_back(detail::classify_value(q.evaluate(mid), std::max(band, 2 * eta * bend)));
  }
  return e;
}

namespace detail {

/// Barycentric grid on the k-simplex with n subdivisions per edge.
struct SimplexGrid {
  int k = 2, n = 0;
  std::vector<std::vector<int>> nodes;  // integer coordinates of the first k barycentric weights
  std::map<std::vector<int>, int> index;
  std::vector<std::vector<int>> cells;  // k-simplices as node index lists

  SimplexGrid(int k_, int n_) : k(k_), n(n_) {
    std::vector<int> c(static_cast<std::size_t>(k), 0);
    std::function<void(int, int)> rec = [&](int pos, int left) {
      if (pos == k) {
        index[c] = static_cast<int>(nodes.size());
        nodes.push_back(c);
        return;
      }
      for (int i = 0; i <= left; ++i) {
        c[static_cast<std::size_t>(pos)] = i;
        rec(pos + 1, left - i);
      }
    };
    rec(0, n);
    // Kuhn subdivision of the ordered region 0 <= a_1 <= ... <= a_k <= n, mapped back by differences.
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> base(static_cast<std::size_t>(k), 0);
    std::function<void(int)> cubes = [&](int pos) {
      if (pos == k) {
        std::vector<int> p = perm;
        do {
          std::vector<int> cell;
          std::vector<int> a = base;
          bool ok = true;
          for (int step = 0; step <= k && ok; ++step) {
            if (step > 0) ++a[static_cast<std::size_t>(p[static_cast<std::size_t>(step - 1)])];
            for (int j = 0; j + 1 < k && ok; ++j) ok = a[static_cast<std::size_t>(j)] <= a[static_cast<std::size_t>(j + 1)];
            ok = ok && a.back() <= n;
            if (!ok) break;
            std::vector<int> b(static_cast<std::size_t>(k));
            b[0] = a[0];
            for (int j = 1; j < k; ++j) b[static_cast<std::size_t>(j)] = a[static_cast<std::size_t>(j)] - a[static_cast<std::size_t>(j - 1)];
            cell.push_back(index.at(b));
          }
          if (ok) cells.push_back(std::move(cell));
        } while (std::next_permutation(p.begin(), p.end()));
        return;
      }
      for (int i = 0; i < n; ++i) {
        base[static_cast<std::size_t>(pos)] = i;
        cubes(pos + 1);
      }
    };
    cubes(0);
  }

  /// Barycentric coordinates (k + 1 weights) of a node; the last weight closes the sum.
  Eigen::VectorXd bary(int node) const {
    Eigen::VectorXd w(k + 1);
    double s = 0.0;
    for (int j = 0; j < k; ++j) {
      w(j) = static_cast<double>(nodes[static_cast<std::size_t>(node)][static_cast<std::size_t>(j)]) / n;
      s += w(j);
    }
    w(k) = 1.0 - s;
    return w;
  }
};

}  // namespace detail

/**
 * Grid classification of phi . v on a simplex face. Vertex order: the
 * barycentric weight j belongs to vertices[j]. eta acts as in classify_edge.
 */
inline FacePartition classify_face(const VectorField& phi, const std::vector<Eigen::VectorXd>& vertices,
                                   const Eigen::VectorXd& v, int grid_res, double tol,
                                   const std::vector<SurfaceHook>& hooks = {}, double eta = 0.0) {
  const int k = static_cast<int>(vertices.size()) - 1;
  if (k != 2 && k != 3) throw bad_input("classify_face: faces of dimension 2 or 3 only");
  if (grid_res < 1) throw bad_input("classify_face: grid resolution must be positive");
  FacePartition fp;
  fp.k = k;
  fp.vertices = vertices;
  fp.normal = v;
  fp.grid_res = grid_res;

  // restrict_to_simplex parametrises by offsets from its first vertex; put the closing vertex there.
  std::vector<Eigen::VectorXd> order{vertices[static_cast<std::size_t>(k)]};
  for (int j = 0; j < k; ++j) order.push_back(vertices[static_cast<std::size_t>(j)]);
  Polynomial g = restrict_to_simplex(detail::normal_product(phi, vertices, v, hooks), order);
  if (eta > 0) g -= detail::vertex_interpolant(g);
  if (detail::coefficient_norm(g) <= 1e-12 * std::max(1.0, detail::field_scale(phi, vertices))) {
    fp.identically_zero = true;
    Region r;
    r.sign = Sign::Tangent;
    r.witness = Eigen::VectorXd::Constant(k + 1, 1.0 / (k + 1));
    fp.regions.push_back(r);
    return fp;
  }

  const detail::SimplexGrid grid(k, grid_res);
  const std::size_t nn = grid.nodes.size();
  std::vector<double> val(nn);
  std::vector<Sign> sgn(nn);
  std::vector<Eigen::VectorXd> vertex_field;
  for (const auto& u : vertices) vertex_field.push_back(phi.evaluate(u));
  for (std::size_t i = 0; i < nn; ++i) {
    Eigen::VectorXd mu(k);
    for (int j = 0; j < k; ++j) mu(j) = static_cast<double>(grid.nodes[i][static_cast<std::size_t>(j)]) / grid_res;
    val[i] = g.evaluate(mu);
    double band = tol;
    if (eta > 0) {
      const Eigen::VectorXd b = grid.bary(static_cast<int>(i));
      Eigen::VectorXd bend = phi.evaluate(fp.point(b));
      for (int j = 0; j <= k; ++j) bend -= b(j) * vertex_field[static_cast<std::size_t>(j)];
      band = std::max(tol, 2 * eta * bend.norm());
    }
    sgn[i] = detail::classify_value(val[i], band);
  }

  // Regions: connected same-sign nodes along cell edges.
  std::vector<int> parent(nn);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int a) {
    while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
    return a;
  };
  for (const auto& cell : grid.cells)
    for (std::size_t a = 0; a < cell.size(); ++a)
      for (std::size_t b = a + 1; b < cell.size(); ++b)
        if (sgn[static_cast<std::size_t>(cell[a])] == sgn[static_cast<std::size_t>(cell[b])])
          parent[static_cast<std::size_t>(find(cell[a]))] = find(cell[b]);
  std::map<int, std::size_t> region_of;
  for (std::size_t i = 0; i < nn; ++i) {
    const int root = find(static_cast<int>(i));
    auto it = region_of.find(root);
    if (it == region_of.end()) {
      it = region_of.emplace(root, fp.regions.size()).first;
      Region r;
      r.sign = sgn[i];
      r.witness = grid.bary(static_cast<int>(i));
      r.value = val[i];
      fp.regions.push_back(r);
    }
    Region& r = fp.regions[it->second];
    ++r.nodes;
    if (std::abs(val[i]) > std::abs(r.value)) {
      r.value = val[i];
      r.witness = grid.bary(static_cast<int>(i));
    }
  }

  // Contour of g = 0 by linear interpolation on every cell.
  const auto crossing = [&](int a, int b) {
    const double ga = val[static_cast<std::size_t>(a)], gb = val[static_cast<std::size_t>(b)];
    const double t = ga / (ga - gb);
    return Eigen::VectorXd((1 - t) * grid.bary(a) + t * grid.bary(b));
  };
  std::map<std::pair<int, int>, std::vector<std::size_t>> at_edge;  // k = 2 chaining
  std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> pieces;
  for (const auto& cell : grid.cells) {
    std::vector<std::pair<int, int>> cuts;
    for (std::size_t a = 0; a < cell.size(); ++a)
      for (std::size_t b = a + 1; b < cell.size(); ++b) {
        const double ga = val[static_cast<std::size_t>(cell[a])], gb = val[static_cast<std::size_t>(cell[b])];
        if ((ga > 0 && gb <= 0) || (ga <= 0 && gb > 0)) cuts.emplace_back(std::min(cell[a], cell[b]), std::max(cell[a], cell[b]));
      }
    if (k == 2) {
      if (cuts.size() == 2) pieces.push_back({cuts[0], cuts[1]});
      continue;
    }
    if (cuts.size() == 3) {
      std::vector<Eigen::VectorXd> poly;
      for (const auto& c : cuts) poly.push_back(crossing(c.first, c.second));
      fp.zero_set.push_back(std::move(poly));
    } else if (cuts.size() == 4) {
      // Quad: order so consecutive crossings share a cell vertex.
      std::vector<std::pair<int, int>> ordered{cuts[0]};
      std::vector<bool> used(4, false);
      used[0] = true;
      for (int step = 1; step < 4; ++step) {
        const auto last = ordered.back();
        for (std::size_t c = 0; c < 4; ++c) {
          if (used[c]) continue;
          const auto& e = cuts[c];
          if (e.first == last.first || e.first == last.second || e.second == last.first || e.second == last.second) {
            ordered.push_back(e);
            used[c] = true;
            break;
          }
        }
      }
      std::vector<Eigen::VectorXd> poly;
      for (const auto& c : ordered) poly.push_back(crossing(c.first, c.second));
      fp.zero_set.push_back(std::move(poly));
    }
  }
  if (k == 2) {
    // Chain segments into polylines through shared grid edges.
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      at_edge[pieces[i].first].push_back(i);
      at_edge[pieces[i].second].push_back(i);
    }
    std::vector<bool> used(pieces.size(), false);
    const auto walk = [&](std::pair<int, int> from, std::size_t seg, std::vector<std::pair<int, int>>& out) {
      while (true) {
        used[seg] = true;
        const auto to = pieces[seg].first == from ? pieces[seg].second : pieces[seg].first;
        out.push_back(to);
        std::optional<std::size_t> next;
        for (std::size_t s : at_edge[to])
          if (!used[s]) next = s;
        if (!next) return;
        from = to;
        seg = *next;
      }
    };
    // Open chains first (start at edges touched once), then closed loops.
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < pieces.size(); ++i) {
        if (used[i]) continue;
        auto start = pieces[i].first;
        if (pass == 0) {
          if (at_edge[pieces[i].first].size() == 1) start = pieces[i].first;
          else if (at_edge[pieces[i].second].size() == 1) start = pieces[i].second;
          else continue;
        }
        std::vector<std::pair<int, int>> chain{start};
        walk(start, i, chain);
        std::vector<Eigen::VectorXd> line;
        for (const auto& c : chain) line.push_back(crossing(c.first, c.second));
        fp.zero_set.push_back(std::move(line));
      }
    }
  }
  return fp;
}

namespace detail {

/// Triangulates a planar convex polygon by a fan after sorting its vertices by angle.
inline std::vector<std::vector<Eigen::VectorXd>> fan_triangulate(std::vector<Eigen::VectorXd> pts) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(pts.front().size());
  for (const auto& p : pts) c += p / static_cast<double>(pts.size());
  Eigen::MatrixXd M(pts.front().size(), static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) M.col(static_cast<Eigen::Index>(i)) = pts[i] - c;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU);
  const Eigen::VectorXd e1 = svd.matrixU().col(0), e2 = svd.matrixU().col(1);
  std::sort(pts.begin(), pts.end(), [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return std::atan2((a - c).dot(e2), (a - c).dot(e1)) < std::atan2((b - c).dot(e2), (b - c).dot(e1));
  });
  std::vector<std::vector<Eigen::VectorXd>> out;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) out.push_back({pts[0], pts[i], pts[i + 1]});
  return out;
}

}  // namespace detail

/// Classifies every face of every patch and collects outward witnesses.
inline PartitionReport partition_boundary(const VectorField& phi, const PatchReport& patches, const PolytopeData& hull,
                                          const PartitionOptions& opt = {}) {
  if (phi.dimension() != hull.dimension) throw bad_input("partition: field and hull dimensions differ");
  PartitionReport rep;
  const double scale = detail::coordinate_scale(hull.vertices);
  for (const auto& patch : patches.patches) {
    PatchPartition pp;
    pp.k = patch.k;
    pp.component_id = patch.component_id;
    const int pid = static_cast<int>(rep.patches.size());
    const auto note = [&](Sign s) {
      pp.has_inward = pp.has_inward || s == Sign::Inward;
      pp.has_outward = pp.has_outward || s == Sign::Outward;
      pp.all_tangent = pp.all_tangent && s == Sign::Tangent;
    };
    if (patch.k == 0) {
      rep.patches.push_back(std::move(pp));
      continue;
    }
    for (std::size_t fi = 0; fi < patch.faces.size(); ++fi) {
      const auto& face = patch.faces[fi];
      std::vector<Eigen::VectorXd> pts;
      for (int id : face.geometric()) pts.push_back(hull.vertices[static_cast<std::size_t>(id)]);
      const double band = std::max(opt.abs_tol, opt.rel_tol * detail::field_scale(phi, pts));
      const double eta = opt.vertex_band ? detail::normal_error(phi, pts, face.normal) : 0.0;
      const auto witness = [&](const Eigen::VectorXd& x, double value) {
        rep.witnesses.push_back({x, face.normal, value, pid, static_cast<int>(fi)});
      };
      const int rank = detail::affine_rank(pts, 1e-7 * scale);
      if (rank == 0 || rank > 3) {  // a single cluster carries no face to test
        ++pp.skipped_faces;
        continue;
      }
      if (rank == 1 && pts.size() > 2) {  // collinear representatives: keep the extreme pair
        std::size_t a = 0, b = 1;
        for (std::size_t i = 0; i < pts.size(); ++i)
          for (std::size_t j = i + 1; j < pts.size(); ++j)
            if ((pts[i] - pts[j]).norm() > (pts[a] - pts[b]).norm()) { a = i; b = j; }
        pts = {pts[a], pts[b]};
      }
      if (rank == 1) {
        auto e = classify_edge(phi, pts[0], pts[1], face.normal, band, opt.hooks, eta);
        std::vector<double> cuts{0.0};
        cuts.insert(cuts.end(), e.breakpoints.begin(), e.breakpoints.end());
        cuts.push_back(1.0);
        for (std::size_t s = 0; s < e.segment_signs.size(); ++s) {
          note(e.segment_signs[s]);
          if (e.segment_signs[s] == Sign::Outward) {
            const Eigen::VectorXd z = e.point(0.5 * (cuts[s] + cuts[s + 1]));
            witness(z, phi.evaluate(z).dot(face.normal));
          }
        }
        pp.edges.push_back(std::move(e));
        continue;
      }
      std::vector<std::vector<Eigen::VectorXd>> simplices;
      if (static_cast<int>(pts.size()) == rank + 1) simplices.push_back(pts);
      else if (rank == 2 && static_cast<int>(pts.size()) > 3) simplices = detail::fan_triangulate(pts);
      else {
        ++pp.skipped_faces;
        continue;
      }
      for (const auto& s : simplices) {
        const int res = rank == 2 ? opt.grid_res_2 : opt.grid_res_3;
        auto fp = classify_face(phi, s, face.normal, res, band, opt.hooks, eta);
        for (const auto& r : fp.regions) {
          note(r.sign);
          if (r.sign == Sign::Outward) witness(fp.point(r.witness), r.value);
        }
        pp.faces.push_back(std::move(fp));
      }
    }
    rep.patches.push_back(std::move(pp));
  }
  rep.forward_closed = rep.witnesses.empty();
  return rep;
}

/**
 * Starting points for new trajectories: up to count witnesses, one per patch
 * before repeating a patch, each moved by step along the unit field direction.
 */
inline std::vector<Eigen::VectorXd> outward_restart(const PartitionReport& report, const VectorField& phi, int count,
                                                    double step = 1e-9) {
  std::vector<Eigen::VectorXd> out;
  if (report.forward_closed || count <= 0) return out;
  std::map<int, std::vector<const Witness*>> by_patch;
  for (const auto& w : report.witnesses) by_patch[w.patch].push_back(&w);
  for (auto& [p, list] : by_patch)
    std::stable_sort(list.begin(), list.end(), [](const Witness* a, const Witness* b) { return a->value > b->value; });
  for (std::size_t round = 0; static_cast<int>(out.size()) < count; ++round) {
    bool any = false;
    for (const auto& [p, list] : by_patch) {
      if (round >= list.size() || static_cast<int>(out.size()) >= count) continue;
      any = true;
      const Eigen::VectorXd f = phi.evaluate(list[round]->point);
      const double fn = f.norm();
      out.push_back(fn > 0 ? Eigen::VectorXd(list[round]->point + step * f / fn) : list[round]->point);
    }
    if (!any) break;
  }
  return out;
}

}  // namespace convtraj
