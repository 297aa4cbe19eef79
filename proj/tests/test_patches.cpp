#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "convtraj/benson.hpp"
#include "convtraj/patches.hpp"
#include "convtraj/systems.hpp"

using namespace convtraj;

namespace {

// Oracle: closest point on a triangle by Voronoi-region case analysis.
Eigen::Vector3d closest_on_triangle(const Eigen::Vector3d& p, const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                    const Eigen::Vector3d& c) {
  const Eigen::Vector3d ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;
  const Eigen::Vector3d bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + d1 / (d1 - d3) * ab;
  const Eigen::Vector3d cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + d2 / (d2 - d6) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) return b + (d4 - d3) / ((d4 - d3) + (d5 - d6)) * (c - b);
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

double grid_hausdorff(const std::vector<Eigen::Vector3d>& A, const std::vector<Eigen::Vector3d>& B, int res) {
  auto directed = [&](const std::vector<Eigen::Vector3d>& X, const std::vector<Eigen::Vector3d>& Y) {
    double h = 0;
    for (int i = 0; i <= res; ++i)
      for (int j = 0; i + j <= res; ++j) {
        const Eigen::Vector3d p = X[0] + (X[1] - X[0]) * i / res + (X[2] - X[0]) * j / res;
        h = std::max(h, (p - closest_on_triangle(p, Y[0], Y[1], Y[2])).norm());
      }
    return h;
  };
  return std::max(directed(A, B), directed(B, A));
}

std::vector<Eigen::VectorXd> yellow_green(int N) {
  std::vector<Eigen::VectorXd> pts;
  for (int k = 0; k < N; ++k) {
    const double a = 2 * std::numbers::pi * k / N;
    pts.push_back(Eigen::Vector3d(std::cos(a), std::sin(2 * a), std::cos(3 * a)));
  }
  return pts;
}

CurveSample planar(const std::vector<Eigen::VectorXd>& pts, bool closed) {
  std::vector<double> t(pts.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
  return make_sample(pts, t, closed);
}

}  // namespace

TEST(Hausdorff, TrivialCases) {
  std::vector<Eigen::VectorXd> tri{Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0)};
  EXPECT_NEAR(hausdorff_facets(tri, tri), 0.0, 1e-15);
  std::vector<Eigen::VectorXd> s1{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)};
  std::vector<Eigen::VectorXd> s2{Eigen::Vector2d(0, 0.3), Eigen::Vector2d(1, 0.3)};
  EXPECT_NEAR(hausdorff_facets(s1, s2), 0.3, 1e-14);
}

TEST(Hausdorff, RandomTrianglesAgainstGridOracle) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Eigen::Vector3d> A, B;
    std::vector<Eigen::VectorXd> Ax, Bx;
    for (int i = 0; i < 3; ++i) {
      A.emplace_back(u(rng), u(rng), u(rng));
      B.emplace_back(u(rng), u(rng), u(rng));
      Ax.push_back(A.back());
      Bx.push_back(B.back());
    }
    EXPECT_NEAR(hausdorff_facets(Ax, Bx), grid_hausdorff(A, B, 20), 1e-4);
  }
}

TEST(Hausdorff, PointDistanceMatchesTriangleOracle) {
  std::mt19937 rng(6);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Vector3d a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng)), c(u(rng), u(rng), u(rng));
    const Eigen::Vector3d p(2 * u(rng), 2 * u(rng), 2 * u(rng));
    const double ref = (p - closest_on_triangle(p, a, b, c)).norm();
    EXPECT_NEAR(point_polytope_distance(p, {a, b, c}), ref, 1e-10);
  }
}

TEST(ProximityClusters, ThinAndFatTriangles) {
  const std::vector<Eigen::VectorXd> thin{Eigen::Vector2d(0, 0), Eigen::Vector2d(0.05, 0), Eigen::Vector2d(3, 0.1)};
  const auto c1 = proximity_clusters(thin, 0.2);
  ASSERT_EQ(c1.size(), 2u);
  EXPECT_EQ(c1[0].size(), 2u);
  const std::vector<Eigen::VectorXd> fat{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0.5, 0.9)};
  EXPECT_EQ(proximity_clusters(fat, 0.2).size(), 3u);
  // Single linkage chains; the representative is the member with the least total distance.
  const std::vector<Eigen::VectorXd> chain{Eigen::Vector2d(0, 0), Eigen::Vector2d(0.1, 0), Eigen::Vector2d(0.2, 0)};
  const auto c2 = proximity_clusters(chain, 0.15);
  ASSERT_EQ(c2.size(), 1u);
  EXPECT_EQ(c2[0].front(), 1);
}

TEST(ArcsEdges, RegularPolygonIsOneArc) {
  std::vector<Eigen::VectorXd> pts;
  for (int k = 0; k < 100; ++k) pts.push_back(Eigen::Vector2d(std::cos(2 * std::numbers::pi * k / 100), std::sin(2 * std::numbers::pi * k / 100)));
  const auto s = planar(pts, true);
  const auto H = convex_hull_molp(pts);
  const double side = (pts[1] - pts[0]).norm();
  const auto r = detect_arcs_edges_2d(s, H, 3 * side);
  EXPECT_EQ(r.count(0), 1);
  EXPECT_EQ(r.count(1), 0);
  EXPECT_EQ(r.arcs[0].size(), 100u);
  EXPECT_FALSE(r.suspicious);
  EXPECT_TRUE(detect_arcs_edges_2d(s, H, 0.5 * side).suspicious);
}

TEST(ArcsEdges, HalfCircleHasChordEdge) {
  std::vector<Eigen::VectorXd> pts;
  for (int k = 0; k <= 50; ++k) pts.push_back(Eigen::Vector2d(std::cos(std::numbers::pi * k / 50), std::sin(std::numbers::pi * k / 50)));
  const auto s = planar(pts, false);
  const auto H = convex_hull_molp(pts);
  const auto r = detect_arcs_edges_2d(s, H, default_delta(s));
  EXPECT_EQ(r.count(0), 1);
  ASSERT_EQ(r.count(1), 1);
  // The chord joins the two ends of the arc.
  const auto& f = r.patches.front().faces.front();
  std::vector<int> src{H.source[static_cast<std::size_t>(f.vertices[0])], H.source[static_cast<std::size_t>(f.vertices[1])]};
  std::sort(src.begin(), src.end());
  EXPECT_EQ(src, (std::vector<int>{0, 50}));
  EXPECT_NEAR(f.normal.y(), -1.0, 1e-12);
  EXPECT_EQ(r.arcs[0].size(), 51u);
}

TEST(ArcsEdges, TrottBitangent) {
  const auto phi = hamiltonian_field(parse_polynomial("144x^4 + 144y^4 - 225x^2 - 225y^2 + 350x^2y^2 + 81", 2));
  IntegrateOptions o;
  o.max_gap = 0.002;
  const auto s = integrate(phi, Eigen::Vector2d(0, -1), 100.0, o);
  const auto H = convex_hull_molp(s.points);
  const auto r = detect_arcs_edges_2d(s, H, default_delta(s));
  EXPECT_EQ(r.count(0), 1);
  ASSERT_EQ(r.count(1), 1);
  const auto& f = r.patches.front().faces.front();
  Eigen::Vector2d a = H.vertices[static_cast<std::size_t>(f.vertices[0])], b = H.vertices[static_cast<std::size_t>(f.vertices[1])];
  if (a.x() > b.x()) std::swap(a, b);
  EXPECT_NEAR(a.x(), -0.4052937596229429, 1e-3);
  EXPECT_NEAR(b.x(), 0.4052937596229429, 1e-3);
  EXPECT_NEAR(a.y(), -0.7125251813139792, 1e-3);
  EXPECT_NEAR(b.y(), -0.7125251813139792, 1e-3);
}

TEST(FacetGraph, DihedralAndCoplanarNeighbours) {
  // Cube: neighbouring facets meet at right angles, normal distance sqrt 2.
  std::vector<Eigen::VectorXd> cube;
  for (int m = 0; m < 8; ++m) cube.push_back(Eigen::Vector3d(m & 1, (m >> 1) & 1, (m >> 2) & 1));
  const auto C = convex_hull_molp(cube);
  for (const auto& adj : facet_graph(C, 1.0)) EXPECT_TRUE(adj.empty());
  EXPECT_FALSE(facet_graph(C, 1.5)[0].empty());
  // Fine sphere sample: adjacent facets are close in every sense.
  std::mt19937 rng(2);
  std::normal_distribution<double> g;
  std::vector<Eigen::VectorXd> sph;
  for (int i = 0; i < 400; ++i) sph.push_back(Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized());
  const auto S = convex_hull_molp(sph);
  const auto G = facet_graph(S, 0.6);
  std::size_t linked = 0;
  for (const auto& a : G) linked += a.empty() ? 0 : 1;
  EXPECT_EQ(linked, S.facets.size());
}

TEST(Patches, YellowGreenSixPatches) {
  const auto H = convex_hull_molp(yellow_green(100));
  const auto r = detect_patches(H, 0.9);
  EXPECT_EQ(r.count(2), 2);
  EXPECT_EQ(r.count(1), 4);
  EXPECT_EQ(r.patches.size(), 6u);
  EXPECT_TRUE(r.flagged_facets.empty());
  // Every facet lies in exactly one component.
  std::vector<int> seen(H.facets.size(), 0);
  for (const auto& p : r.patches)
    for (int f : p.facets) ++seen[static_cast<std::size_t>(f)];
  for (int c : seen) EXPECT_EQ(c, 1);
  for (const auto& p : r.patches) {
    for (const auto& t : p.faces) {
      EXPECT_EQ(static_cast<int>(t.vertices.size()), p.k + 1);
      EXPECT_NEAR(t.normal.norm(), 1.0, 1e-12);
    }
    if (p.k == 2) {
      ASSERT_EQ(p.faces.size(), 1u);
      EXPECT_NEAR(std::abs(p.faces[0].normal.z()), 1.0, 1e-5);
    }
  }
}

TEST(Patches, PlateauScanIsStable) {
  const auto H = convex_hull_molp(yellow_green(100));
  const auto links = facet_links(H);
  const auto pl = plateau_scan([&](double d) { return detect_patches(H, d, &links); }, 0.234, 2.0, 40);
  EXPECT_TRUE(pl.stable);
  EXPECT_GE(pl.hi / pl.lo, 2.0);
  EXPECT_EQ(pl.report.count(2), 2);
  EXPECT_EQ(pl.report.count(1), 4);
  for (const auto& p : pl.probes)
    if (p.delta >= pl.lo && p.delta <= pl.hi) EXPECT_EQ(p.counts, pl.report.counts);
}

TEST(Patches, OctahedronFacetsStandAlone) {
  std::vector<Eigen::VectorXd> oct;
  for (int j = 0; j < 3; ++j) {
    oct.push_back(Eigen::Vector3d::Unit(j));
    oct.push_back(-Eigen::Vector3d::Unit(j));
  }
  const auto r = detect_patches(convex_hull_molp(oct), 0.5);
  EXPECT_EQ(r.patches.size(), 8u);
  EXPECT_EQ(r.count(2), 8);
  for (const auto& p : r.patches) EXPECT_EQ(p.facets.size(), 1u);
}

TEST(Patches, FaceTestRejectsDiagonals) {
  // A planar quadrilateral facet with two short sides: representatives must
  // form a side, not a diagonal.
  std::vector<Eigen::VectorXd> pts{Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(0.1, 0, 0), Eigen::Vector3d(0, 3, 0),
                                   Eigen::Vector3d(0.1, 3, 0), Eigen::Vector3d(0.05, 1.5, -1)};
  const auto H = convex_hull_molp(pts);
  const auto vf = H.vertex_facets();
  for (std::size_t f = 0; f < H.facets.size(); ++f) {
    if (H.facets[f].vertices.size() != 4) continue;
    const auto face = facet_face(H, vf, static_cast<int>(f), 0.5);
    ASSERT_TRUE(face.has_value());
    EXPECT_EQ(face->k, 1);
    const auto& U = face->tuple.vertices;
    EXPECT_NEAR((H.vertices[static_cast<std::size_t>(U[0])] - H.vertices[static_cast<std::size_t>(U[1])]).norm(), 3.0, 1e-12);
  }
}

TEST(Patches, Errors) {
  std::vector<Eigen::VectorXd> sq{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1), Eigen::Vector2d(0, 1)};
  const auto H = convex_hull_molp(sq);
  EXPECT_THROW(detect_patches(H, 0.5), Error);
  EXPECT_THROW(detect_arcs_edges_2d(planar(sq, true), H, 0.0), Error);
  EXPECT_THROW(plateau_scan([&](double) { return PatchReport{}; }, 1.0, 0.5), Error);
}
