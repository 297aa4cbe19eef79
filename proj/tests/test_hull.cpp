#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "convtraj/benson.hpp"
#include "convtraj/quickhull.hpp"

using namespace convtraj;

namespace {

std::vector<Eigen::VectorXd> random_cloud(std::mt19937& rng, int n, int count) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd p(n);
    for (int j = 0; j < n; ++j) p(j) = g(rng);
    pts.push_back(p);
  }
  return pts;
}

std::vector<Eigen::VectorXd> yellow_green(int N) {
  std::vector<Eigen::VectorXd> pts;
  for (int k = 0; k < N; ++k) {
    const double a = 2 * std::numbers::pi * k / N;
    pts.push_back(Eigen::Vector3d(std::cos(a), std::sin(2 * a), std::cos(3 * a)));
  }
  return pts;
}

std::vector<int> sorted_sources(const PolytopeData& P) {
  auto s = P.source;
  std::sort(s.begin(), s.end());
  return s;
}

// Oracle: brute-force LP optimum over all vertices of {Bx >= a}.
double brute_force_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& B, const Eigen::VectorXd& a) {
  const int m = static_cast<int>(B.rows()), n = static_cast<int>(B.cols());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      Eigen::MatrixXd S(n, n);
      Eigen::VectorXd r(n);
      for (int i = 0; i < n; ++i) {
        S.row(i) = B.row(idx[static_cast<std::size_t>(i)]);
        r(i) = a(idx[static_cast<std::size_t>(i)]);
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
      if (!lu.isInvertible()) return;
      const Eigen::VectorXd x = lu.solve(r);
      if (((B * x - a).array() >= -1e-9).all()) best = std::min(best, c.dot(x));
      return;
    }
    for (int i = start; i < m; ++i) {
      idx[static_cast<std::size_t>(depth)] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST(Lp, OneDimensional) {
  Eigen::MatrixXd B(1, 1);
  B << 1;
  const auto s = lp_solve(Eigen::VectorXd::Ones(1), B, Eigen::VectorXd::Constant(1, 2.0));
  EXPECT_NEAR(s.x(0), 2.0, 1e-12);
  EXPECT_NEAR(s.value, 2.0, 1e-12);
  EXPECT_NEAR(s.u(0), 1.0, 1e-12);
}

TEST(Lp, InfeasibleAndUnbounded) {
  Eigen::MatrixXd B(2, 1);
  B << 1, -1;
  Eigen::VectorXd a(2);
  a << 2, -1;  // x >= 2 and x <= 1
  try {
    lp_solve(Eigen::VectorXd::Ones(1), B, a);
    FAIL();
  } catch (const LpError& e) {
    EXPECT_EQ(e.status(), LpStatus::Infeasible);
  }
  Eigen::MatrixXd B1(1, 1);
  B1 << 1;
  try {
    lp_solve(-Eigen::VectorXd::Ones(1), B1, Eigen::VectorXd::Zero(1));
    FAIL();
  } catch (const LpError& e) {
    EXPECT_EQ(e.status(), LpStatus::Unbounded);
  }
}

TEST(Lp, CubeInteriorPointEntersBody) {
  // min t s.t. v + t e in conv(cube vertices), as a lambda LP.
  std::vector<Eigen::VectorXd> cube;
  for (int m = 0; m < 8; ++m) cube.push_back(Eigen::Vector3d(m & 1, (m >> 1) & 1, (m >> 2) & 1));
  const Eigen::Vector3d v(0.5, 0.4, 0.6);
  // variables (lambda_1..8, t); rows: equality as two inequalities, lambda >= 0
  const int nv = 9;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2 * 4 + 8, nv);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(2 * 4 + 8);
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 8; ++i) B(2 * j, i) = cube[static_cast<std::size_t>(i)](j);
    B(2 * j, 8) = -1;
    a(2 * j) = v(j);
    B.row(2 * j + 1) = -B.row(2 * j);
    a(2 * j + 1) = -v(j);
  }
  B.row(6).head(8).setOnes();
  a(6) = 1;
  B.row(7) = -B.row(6);
  a(7) = -1;
  for (int i = 0; i < 8; ++i) B(8 + i, i) = 1;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(nv);
  c(8) = 1;
  const auto s = lp_solve(c, B, a);
  EXPECT_LT(s.value, 0);
  EXPECT_NEAR(s.value, -0.4, 1e-9);  // limited by the smallest coordinate
}

TEST(Lp, RandomAgainstVertexEnumeration) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 3;
    const int m = n + 3 + trial % 5;
    Eigen::MatrixXd B(m + 2 * n, n);
    Eigen::VectorXd a(m + 2 * n);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) B(i, j) = u(rng);
      a(i) = -1.0 + 0.5 * u(rng);  // origin strictly feasible
    }
    for (int j = 0; j < n; ++j) {
      B.row(m + 2 * j) = Eigen::VectorXd::Unit(n, j).transpose();
      a(m + 2 * j) = -3;
      B.row(m + 2 * j + 1) = -Eigen::VectorXd::Unit(n, j).transpose();
      a(m + 2 * j + 1) = -3;
    }
    Eigen::VectorXd c(n);
    for (int j = 0; j < n; ++j) c(j) = u(rng);
    const auto s = lp_solve(c, B, a);
    const double ref = brute_force_lp(c, B, a);
    EXPECT_NEAR(s.value, ref, 1e-9 * (1 + std::abs(ref))) << "trial " << trial;
    EXPECT_GE((B * s.x - a).minCoeff(), -1e-9);
    EXPECT_GE(s.u.minCoeff(), 0.0);
    EXPECT_LT((B.transpose() * s.u - c).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT(std::abs(a.dot(s.u) - s.value), 1e-9 * (1 + std::abs(s.value)));
  }
}

TEST(Quickhull, SmallShapes) {
  std::vector<Eigen::VectorXd> tri{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1),
                                   Eigen::Vector2d(0.2, 0.2)};
  const auto T = quickhull_oracle(tri);
  EXPECT_EQ(T.vertices.size(), 3u);
  EXPECT_EQ(T.facets.size(), 3u);

  std::vector<Eigen::VectorXd> oct;
  for (int j = 0; j < 3; ++j) {
    oct.push_back(Eigen::Vector3d::Unit(j));
    oct.push_back(-Eigen::Vector3d::Unit(j));
  }
  const auto O = quickhull_oracle(oct);
  EXPECT_EQ(O.vertices.size(), 6u);
  EXPECT_EQ(O.facets.size(), 8u);
  EXPECT_EQ(O.edge_count(), 12u);

  std::vector<Eigen::VectorXd> cyc;
  for (int i = 0; i < 8; ++i) {
    const double t = i * 0.5 - 1.7;
    cyc.push_back(Eigen::Vector4d(t, t * t, t * t * t, t * t * t * t));
  }
  const auto C = quickhull_oracle(cyc);
  EXPECT_EQ(C.vertices.size(), 8u);
  EXPECT_EQ(C.edge_count(), 28u);  // neighborly
  EXPECT_EQ(C.facets.size(), 20u); // cyclic polytope C(8,4)
}

TEST(Quickhull, DegenerateAndCollinear) {
  std::vector<Eigen::VectorXd> line{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), Eigen::Vector2d(2, 2)};
  EXPECT_THROW(quickhull_oracle(line), Error);
  std::vector<Eigen::VectorXd> sq{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(2, 0),
                                  Eigen::Vector2d(2, 1), Eigen::Vector2d(0, 1)};
  const auto P = quickhull_oracle(sq);
  EXPECT_EQ(P.vertices.size(), 4u);
  EXPECT_EQ(P.facets.size(), 4u);
  // Cube with face centres and duplicated corners.
  std::vector<Eigen::VectorXd> cube;
  for (int m = 0; m < 8; ++m) cube.push_back(Eigen::Vector3d(m & 1, (m >> 1) & 1, (m >> 2) & 1));
  for (int j = 0; j < 3; ++j) {
    Eigen::Vector3d c(0.5, 0.5, 0.5);
    c(j) = 0;
    cube.push_back(c);
    c(j) = 1;
    cube.push_back(c);
  }
  cube.push_back(cube[3]);
  const auto Q = quickhull_oracle(cube);
  EXPECT_EQ(Q.vertices.size(), 8u);
  EXPECT_EQ(Q.facets.size(), 6u);
  EXPECT_EQ(Q.incidence_nonzeros(), 24u);
  EXPECT_EQ(Q.edge_count(), 12u);
}

TEST(Quickhull, ExactSignsOnNearDegenerateInput) {
  // Points on a circle snapped to a coarse grid: many exactly cocircular and
  // collinear configurations.
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 40; ++j) pts.push_back(Eigen::Vector2d(i * 0.125, j * 0.125));
  const auto P = quickhull_oracle(pts);
  EXPECT_EQ(P.vertices.size(), 4u);
}

TEST(VertexEnumeration, CubeSlices) {
  auto cube = HPolytope::box(Eigen::Vector3d::Zero(), Eigen::Vector3d::Ones());
  const auto r = cube.cut(Eigen::Vector3d(-1, 0, 0), -0.5);  // x <= 0.5
  EXPECT_TRUE(r.changed);
  EXPECT_EQ(cube.vertices().size(), 8u);
  EXPECT_EQ(r.created.size(), 4u);
  for (const auto& v : cube.vertices()) EXPECT_LE(v.y(0), 0.5 + 1e-15);
  const auto before = cube.vertices().size();
  EXPECT_FALSE(cube.cut(Eigen::Vector3d(1, 0, 0), -5.0).changed);
  EXPECT_EQ(cube.vertices().size(), before);
}

TEST(VertexEnumeration, SimplexCutMatchesOracle) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int D = 3 + trial % 2;
    // Simplex {y >= 0, sum y <= 1} via box then a cut.
    auto P = HPolytope::box(Eigen::VectorXd::Zero(D), Eigen::VectorXd::Ones(D));
    P.cut(-Eigen::VectorXd::Ones(D), -1.0);
    Eigen::VectorXd a(D);
    for (int j = 0; j < D; ++j) a(j) = u(rng);
    const Eigen::VectorXd centroid = Eigen::VectorXd::Constant(D, 1.0 / (D + 1));
    const double b = a.dot(centroid);
    // Oracle: simplex vertices kept plus edge crossings.
    std::vector<Eigen::VectorXd> sv{Eigen::VectorXd::Zero(D)};
    for (int j = 0; j < D; ++j) sv.push_back(Eigen::VectorXd::Unit(D, j));
    std::vector<Eigen::VectorXd> cloud;
    for (std::size_t i = 0; i < sv.size(); ++i) {
      const double si = a.dot(sv[i]) - b;
      if (si >= 0) cloud.push_back(sv[i]);
      for (std::size_t j = i + 1; j < sv.size(); ++j) {
        const double sj = a.dot(sv[j]) - b;
        if ((si > 0 && sj < 0) || (si < 0 && sj > 0)) cloud.push_back(sv[i] + si / (si - sj) * (sv[j] - sv[i]));
      }
    }
    P.cut(a, b);
    const auto ref = quickhull_oracle(cloud);
    ASSERT_EQ(P.vertices().size(), ref.vertices.size());
    for (const auto& v : P.vertices()) {
      double best = 1e9;
      for (const auto& w : ref.vertices) best = std::min(best, (v.y - w).norm());
      EXPECT_LT(best, 1e-10);
    }
  }
}

TEST(Benson, SquareWithCentre) {
  std::vector<Eigen::VectorXd> pts{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1),
                                   Eigen::Vector2d(0, 1), Eigen::Vector2d(0.5, 0.5)};
  const auto P = convex_hull_molp(pts);
  EXPECT_EQ(P.vertices.size(), 4u);
  EXPECT_EQ(P.facets.size(), 4u);
}

TEST(Benson, YellowGreenCounts) {
  const auto P = convex_hull_molp(yellow_green(100));
  EXPECT_EQ(P.vertices.size(), 70u);
  EXPECT_EQ(P.facets.size(), 102u);
  EXPECT_EQ(P.edge_count(), 170u);
  EXPECT_EQ(P.incidence_nonzeros(), 340u);
  EXPECT_EQ(P.adjacency_nonzeros(), 340u);
  const auto Q = quickhull_oracle(yellow_green(100));
  EXPECT_EQ(sorted_sources(P), sorted_sources(Q));
  EXPECT_EQ(Q.facets.size(), 102u);
}

TEST(Benson, OracleEquivalenceRandom3d) {
  std::mt19937 rng(21);
  const auto pts = random_cloud(rng, 3, 50);
  const auto P = convex_hull_molp(pts);
  const auto Q = quickhull_oracle(pts);
  EXPECT_EQ(sorted_sources(P), sorted_sources(Q));
  EXPECT_EQ(P.facets.size(), Q.facets.size());
}

TEST(Benson, ContractInvariants) {
  std::mt19937 rng(8);
  for (int n : {2, 3, 4}) {
    const auto pts = random_cloud(rng, n, 40);
    const auto P = convex_hull_molp(pts);
    const double tol = P.eps * detail::coordinate_scale(P.vertices);
    for (const auto& p : pts) EXPECT_LE(P.max_violation(p), tol);
    for (const auto& f : P.facets) {
      EXPECT_NEAR(f.normal.norm(), 1.0, 1e-12);
      EXPECT_GE(static_cast<int>(f.vertices.size()), n);
      for (int v : f.vertices) EXPECT_LE(std::abs(f.normal.dot(P.vertices[static_cast<std::size_t>(v)]) - f.offset), tol);
    }
    if (n == 3) EXPECT_EQ(static_cast<long>(P.vertices.size()) - static_cast<long>(P.edge_count()) + static_cast<long>(P.facets.size()), 2);
    // Irredundancy: dropping a facet admits a point beyond it.
    for (std::size_t drop = 0; drop < P.facets.size(); ++drop) {
      const auto m = static_cast<Eigen::Index>(P.facets.size() - 1);
      Eigen::MatrixXd Bb(m + 2 * n, n);
      Eigen::VectorXd ab(Bb.rows());
      Eigen::Index r = 0;
      for (std::size_t f = 0; f < P.facets.size(); ++f) {
        if (f == drop) continue;
        Bb.row(r) = -P.facets[f].normal.transpose();
        ab(r++) = -P.facets[f].offset;
      }
      for (int j = 0; j < n; ++j) {
        Bb.row(m + 2 * j) = Eigen::VectorXd::Unit(n, j).transpose();
        ab(m + 2 * j) = -100;
        Bb.row(m + 2 * j + 1) = -Eigen::VectorXd::Unit(n, j).transpose();
        ab(m + 2 * j + 1) = -100;
      }
      const auto s = lp_solve(-P.facets[drop].normal, Bb, ab);
      EXPECT_GT(-s.value, P.facets[drop].offset + 1e-9);
    }
    // No vertex is a convex combination of the others.
    for (std::size_t v = 0; v < P.vertices.size(); ++v) {
      std::vector<Eigen::VectorXd> others;
      for (std::size_t w = 0; w < P.vertices.size(); ++w) {
        if (w != v) others.push_back(P.vertices[w]);
      }
      const int N = static_cast<int>(others.size());
      Eigen::MatrixXd B(2 * (n + 1) + N, N);
      Eigen::VectorXd a(B.rows());
      B.setZero();
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < N; ++i) B(2 * j, i) = others[static_cast<std::size_t>(i)](j);
        a(2 * j) = P.vertices[v](j);
        B.row(2 * j + 1) = -B.row(2 * j);
        a(2 * j + 1) = -P.vertices[v](j);
      }
      B.row(2 * n).setOnes();
      a(2 * n) = 1;
      B.row(2 * n + 1).setConstant(-1);
      a(2 * n + 1) = -1;
      for (int i = 0; i < N; ++i) {
        B(2 * n + 2 + i, i) = 1;
        a(2 * n + 2 + i) = 0;
      }
      EXPECT_THROW(lp_solve(Eigen::VectorXd::Zero(N), B, a), LpError);
    }
  }
}

TEST(Benson, OuterVolumeNeverGrows) {
  for (int n : {2, 3}) {
    std::mt19937 rng(30 + n);
    const auto pts = random_cloud(rng, n, 25);
    std::vector<double> vols;
    BensonOptions opt;
    opt.trace = [&](const BensonTrace& t) {
      std::vector<Eigen::VectorXd> vs;
      for (const auto& v : t.outer->vertices()) vs.push_back(v.y);
      vols.push_back(hull_volume(vs));
    };
    convex_hull_molp(pts, opt);
    ASSERT_GT(vols.size(), 2u);
    for (std::size_t i = 1; i < vols.size(); ++i) EXPECT_LE(vols[i], vols[i - 1] * (1 + 1e-12));
  }
}

TEST(Benson, Errors) {
  std::vector<Eigen::VectorXd> line{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), Eigen::Vector2d(2, 2)};
  EXPECT_THROW(convex_hull_molp(line), Error);
  std::vector<Eigen::VectorXd> two{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)};
  EXPECT_THROW(convex_hull_molp(two), Error);
}
