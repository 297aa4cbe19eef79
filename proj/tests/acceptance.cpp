// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance --only N   run criterion N alone (exit code reflects it)

#include <chrono>
#include <cstring>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "convtraj/convtraj.hpp"

using namespace convtraj;

namespace {

// Tolerances and budgets, pinned.
constexpr double kTrottEndpointTol = 1e-3;
constexpr double kTrottBreakX = 0.239173943;
constexpr double kTrottBreakTol = 1e-3;
constexpr double kTrottSeconds = 30.0;
constexpr double kHullSeconds = 10.0;
constexpr double kVdvLimitTol = 5e-3;
constexpr double kParamTol = 0.01;
constexpr double kMatchTol = 1e-7;
constexpr double kOnSurfaceTol = 1e-9;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

std::vector<Eigen::VectorXd> geometric_points(const PolytopeData& H, const FaceTuple& f) {
  std::vector<Eigen::VectorXd> out;
  for (int v : f.geometric()) out.push_back(H.vertices[static_cast<std::size_t>(v)]);
  return out;
}

// ---------------------------------------------------------------------------

Outcome ac1() {
  const auto t0 = Clock::now();
  const auto R = run_example("trott");
  const double secs = since(t0);
  const double a = 0.4052937596229429, b = -0.7125251813139792;
  std::ostringstream d;
  bool ok = R.patches.count(0) == 1 && R.patches.count(1) == 1;
  d << "arcs " << R.patches.count(0) << " edges " << R.patches.count(1);
  double end_err = 1e9;
  std::vector<double> xs;
  for (const auto& p : R.partition->patches)
    for (const auto& e : p.edges) {
      Eigen::Vector2d u = e.u0, w = e.u1;
      if (u.x() > w.x()) std::swap(u, w);
      end_err = std::max((u - Eigen::Vector2d(-a, b)).norm(), (w - Eigen::Vector2d(a, b)).norm());
      for (double l : e.breakpoints) xs.push_back(e.point(l).x());
    }
  ok = ok && end_err <= kTrottEndpointTol;
  d << "; endpoint error " << fmt(end_err);
  ok = ok && !R.partition->forward_closed;
  d << "; forward_closed " << R.partition->forward_closed;
  bool hit = false;
  d << "; breakpoint x:";
  for (double x : xs) {
    d << " " << fmt(x);
    hit = hit || std::abs(std::abs(x) - kTrottBreakX) <= kTrottBreakTol;
  }
  d << " (want |x| = " << kTrottBreakX << ")";
  ok = ok && hit && secs < kTrottSeconds;
  d << "; " << fmt(secs) << " s";
  return {ok, d.str()};
}

Outcome ac2() {
  auto s = preset("yellow-green");
  s.options.eps = 1e-9;
  const auto t0 = Clock::now();
  const auto R = pipeline(s, Stage::Hull);
  const double secs = since(t0);
  const auto& H = R.hull;
  const bool ok = H.vertices.size() == 70 && H.facets.size() == 102 && H.edge_count() == 170 &&
                  H.incidence_nonzeros() == 340 && H.adjacency_nonzeros() == 340 && secs < kHullSeconds;
  std::ostringstream d;
  d << H.vertices.size() << " vertices, " << H.facets.size() << " facets, " << H.edge_count() << " edges, incidence "
    << H.incidence_nonzeros() << ", adjacency " << H.adjacency_nonzeros() << "; " << fmt(secs) << " s";
  return {ok, d.str()};
}

Outcome ac3() {
  const auto R = run_example("yellow-green");
  const auto f2 = parse_polynomial("x3 - 4*x1^3 + 3*x1", 3);
  std::ostringstream d;
  bool ok = R.patches.count(2) == 2 && R.patches.count(1) == 4 && R.plateau && R.plateau->stable;
  d << "#2 " << R.patches.count(2) << " #1 " << R.patches.count(1);
  int cubic = 0, cubic_tangent = 0, mixed = 0, triangles_mixed = 0;
  double zero_err = 0.0, cover_err = 0.0;
  for (std::size_t i = 0; i < R.partition->patches.size(); ++i) {
    const auto& pp = R.partition->patches[i];
    const auto& patch = R.patches.patches[i];
    if (pp.k == 1) {
      // A patch on the cubic surface: every edge midpoint lies on it.
      bool on_cubic = !pp.edges.empty();
      for (const auto& e : pp.edges) on_cubic = on_cubic && std::abs(f2.evaluate(e.point(0.5))) < kOnSurfaceTol;
      if (on_cubic) {
        ++cubic;
        bool symbolic = pp.all_tangent;
        for (const auto& e : pp.edges) symbolic = symbolic && e.identically_zero;
        cubic_tangent += symbolic ? 1 : 0;
      } else {
        mixed += pp.has_inward && pp.has_outward ? 1 : 0;
      }
    } else if (pp.k == 2) {
      triangles_mixed += pp.has_inward && pp.has_outward ? 1 : 0;
      const auto& fp = pp.faces.at(0);
      const double step = 2.0 / fp.grid_res;
      std::vector<Eigen::VectorXd> contour;
      std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>> segments;
      for (const auto& line : fp.zero_set) {
        for (const auto& bary : line) contour.push_back(fp.point(bary));
        for (std::size_t j = 1; j < line.size(); ++j)
          segments.emplace_back(fp.point(line[j - 1]).head<3>(), fp.point(line[j]).head<3>());
      }
      for (const auto& p : contour)
        zero_err = std::max(zero_err, std::min({std::abs(p(1)), std::abs(p(0) - 0.5), std::abs(p(0) + 0.5)}));
      // Interior lines y = 0 and x = +-1/2 (the latter where it is not an edge of the face).
      const auto tri = geometric_points(R.hull, patch.faces.at(0));
      Eigen::Vector3d lo = tri[0], hi = tri[0];
      for (const auto& v : tri) {
        lo = lo.cwiseMin(v.head<3>());
        hi = hi.cwiseMax(v.head<3>());
      }
      const double z = tri[0](2);
      auto inside = [&](const Eigen::Vector3d& q) {
        // Barycentric test in the xy-projection.
        const Eigen::Vector2d A = tri[0].head<2>(), B = tri[1].head<2>(), C = tri[2].head<2>(), P = q.head<2>();
        const double den = (B - A).x() * (C - A).y() - (B - A).y() * (C - A).x();
        const double l1 = ((B - P).x() * (C - P).y() - (B - P).y() * (C - P).x()) / den;
        const double l2 = ((C - P).x() * (A - P).y() - (C - P).y() * (A - P).x()) / den;
        return l1 > step && l2 > step && 1 - l1 - l2 > step;
      };
      std::vector<Eigen::Vector3d> probes;
      for (int i2 = 0; i2 <= 200; ++i2) {
        const double t = lo(0) + (hi(0) - lo(0)) * i2 / 200.0;
        probes.emplace_back(t, 0.0, z);
        const double s2 = lo(1) + (hi(1) - lo(1)) * i2 / 200.0;
        probes.emplace_back(0.5, s2, z);
        probes.emplace_back(-0.5, s2, z);
      }
      for (const auto& q : probes) {
        if (!inside(q)) continue;
        double best = 1e9;
        for (const auto& [a, b] : segments) {
          const Eigen::Vector3d ab = b - a;
          const double t = ab.squaredNorm() > 0 ? std::clamp((q - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0) : 0.0;
          best = std::min(best, (a + t * ab - q).norm());
        }
        cover_err = std::max(cover_err, best);
      }
      ok = ok && zero_err <= step && cover_err <= step;
    }
  }
  ok = ok && cubic == 2 && cubic_tangent == 2 && mixed == 2 && triangles_mixed == 2 && !R.partition->forward_closed;
  d << "; cubic patches " << cubic << " (symbolically tangent " << cubic_tangent << "), mixed 1-patches " << mixed
    << ", mixed triangles " << triangles_mixed << "; zero set off-line " << fmt(zero_err) << ", line coverage gap "
    << fmt(cover_err) << " (limit 2/grid_res); forward_closed " << R.partition->forward_closed;
  return {ok, d.str()};
}

Outcome ac4() {
  const auto s = preset("van-de-vusse");
  std::istringstream in(s.network);
  const auto phi = crn_field(parse_network(in));
  const std::vector<std::string> printed{"-x1 - 20*x1^2", "x1 - x2", "x2", "10*x1^2"};
  bool exact = true;
  for (int i = 0; i < 4; ++i)
    exact = exact && phi.components()[static_cast<std::size_t>(i)] == parse_polynomial(printed[static_cast<std::size_t>(i)], 4);
  const auto R = pipeline(s);
  const Eigen::VectorXd end = R.lift(R.sample.points.back());
  const double lim_err = (end - Eigen::Vector4d(0, 0, 0.1522, 0.4238)).cwiseAbs().maxCoeff();
  int outward = 0;
  for (const auto& p : R.partition->patches) outward += p.k == 1 && p.has_outward ? 1 : 0;
  const bool ok = exact && lim_err <= kVdvLimitTol && R.sample.dimension == 3 && R.patches.count(1) == 2 &&
                  R.patches.count(2) == 0 && outward == 1 && !R.partition->forward_closed;
  std::ostringstream d;
  d << "field exact " << exact << "; limit error " << fmt(lim_err) << "; reduced dimension " << R.sample.dimension
    << "; 1-patches " << R.patches.count(1) << " with outward " << outward << "; forward_closed "
    << R.partition->forward_closed;
  return {ok, d.str()};
}

Outcome ac5() {
  const auto s = preset("weakly-reversible");
  std::istringstream in(s.network);
  const bool wr = weakly_reversible(parse_network(in));
  const auto R = pipeline(s);
  int closed_triangles = 0, outward_edges = 0;
  for (std::size_t i = 0; i < R.partition->patches.size(); ++i) {
    const auto& pp = R.partition->patches[i];
    if (pp.k == 2 && !pp.has_outward && R.patches.patches[i].faces.at(0).geometric().size() == 3) ++closed_triangles;
    if (pp.k == 1 && pp.has_outward) ++outward_edges;
  }
  const bool ok = wr && closed_triangles >= 1 && outward_edges >= 1 && !R.partition->forward_closed;
  std::ostringstream d;
  d << "weakly reversible " << wr << "; triangle 2-patches without outward points " << closed_triangles
    << "; 1-patches with outward witnesses " << outward_edges << "; forward_closed " << R.partition->forward_closed;
  return {ok, d.str()};
}

bool near_gap(double g, double target) { return std::abs(g - target) <= kParamTol; }

/// Sorted cyclic gaps of parameters on the unit circle.
std::vector<double> cyclic_gaps(std::vector<double> t) {
  std::sort(t.begin(), t.end());
  std::vector<double> g;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) g.push_back(t[i + 1] - t[i]);
  g.push_back(1.0 - t.back() + t.front());
  return g;
}

Outcome ac6() {
  const auto R = run_example("smilansky-3-4");
  int bad_edges = 0, edges = 0, triangles = 0, quads = 0, bad_faces = 0;
  for (const auto& p : R.report.patches.patches) {
    for (const auto& f : p.faces) {
      const std::vector<double> t(f.params.begin(), f.params.end() - f.padding);
      if (p.k == 1) {
        ++edges;
        const double g = std::abs(t[0] - t[1]);
        const bool ok = (g > 0.25 - kParamTol && g < 1.0 / 3 + kParamTol) || (g > 2.0 / 3 - kParamTol && g < 0.75 + kParamTol);
        bad_edges += ok ? 0 : 1;
      } else if (p.k == 2) {
        const auto gaps = cyclic_gaps(t);
        const double want = t.size() == 3 ? 1.0 / 3 : t.size() == 4 ? 0.25 : -1;
        bool ok = want > 0;
        for (double g : gaps) ok = ok && near_gap(g, want);
        triangles += ok && t.size() == 3 ? 1 : 0;
        quads += ok && t.size() == 4 ? 1 : 0;
        bad_faces += ok ? 0 : 1;
      }
    }
  }
  const bool ok = R.patches.count(3) == 0 && bad_edges == 0 && bad_faces == 0 && edges > 0 && triangles > 0 && quads > 0;
  std::ostringstream d;
  d << "#3 " << R.patches.count(3) << "; edges " << edges << " (off-range " << bad_edges << "); triangles " << triangles
    << ", quadrilaterals " << quads << " (irregular " << bad_faces << ")";
  return {ok, d.str()};
}

Outcome ac7() {
  const auto R = run_example("degree14");
  int tri = 0;
  for (const auto& p : R.patches.patches)
    if (p.k == 2 && p.faces.size() == 1 && p.faces[0].geometric().size() == 3) ++tri;
  // The triangle count must hold over a delta range spanning a factor of two around the chosen delta.
  double lo = R.patches.delta, hi = R.patches.delta;
  const auto& pr = R.plateau->probes;
  std::size_t c = 0;
  while (c + 1 < pr.size() && pr[c + 1].delta <= R.patches.delta) ++c;
  auto twenty = [&](std::size_t i) { return pr[i].counts.size() > 2 && pr[i].counts[2] == 20; };
  if (twenty(c)) {
    std::size_t a = c, b = c;
    while (a > 0 && twenty(a - 1)) --a;
    while (b + 1 < pr.size() && twenty(b + 1)) ++b;
    lo = pr[a].delta;
    hi = pr[b].delta;
  }
  const bool ok = R.patches.count(2) == 20 && tri == 20 && hi / lo >= 2.0;
  std::ostringstream d;
  d << "2-patches " << R.patches.count(2) << " (triangles " << tri << "); #2 = 20 over delta [" << fmt(lo) << ", "
    << fmt(hi) << "]";
  return {ok, d.str()};
}

Outcome ac8() {
  std::mt19937_64 rng(20240521);
  std::normal_distribution<double> g;
  int failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 3;
    const int N = n == 4 ? 25 + trial % 20 : 30 + trial % 50;
    std::vector<Eigen::VectorXd> pts;
    for (int i = 0; i < N; ++i) {
      Eigen::VectorXd p(n);
      for (int j = 0; j < n; ++j) p(j) = g(rng);
      pts.push_back(p);
    }
    try {
      const auto B = convex_hull_molp(pts);
      const auto Q = quickhull_oracle(pts);
      bool same = B.vertices.size() == Q.vertices.size();
      for (const auto& v : B.vertices) {
        bool found = false;
        for (const auto& w : Q.vertices) found = found || (v - w).norm() <= kMatchTol;
        same = same && found;
      }
      failures += same ? 0 : 1;
    } catch (const std::exception&) {
      ++failures;
    }
  }
  return {failures == 0, "200 clouds, failures " + std::to_string(failures)};
}

Outcome ac9() {
  std::vector<double> dist;
  std::vector<std::vector<std::vector<Eigen::VectorXd>>> faces;  // per N: triangles sorted by normal z
  std::ostringstream d;
  for (int N : {100, 200, 400, 800}) {
    auto s = preset("yellow-green");
    s.trig->samples = N;
    const auto R = pipeline(s, Stage::Patches);
    std::vector<std::pair<double, std::vector<Eigen::VectorXd>>> tri;
    for (const auto& p : R.patches.patches)
      if (p.k == 2) tri.emplace_back(p.faces[0].normal(2), geometric_points(R.hull, p.faces[0]));
    std::sort(tri.begin(), tri.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    d << "N=" << N << ": " << tri.size() << " triangles; ";
    std::vector<std::vector<Eigen::VectorXd>> f;
    for (auto& t : tri) f.push_back(t.second);
    faces.push_back(f);
  }
  bool ok = true;
  for (std::size_t i = 0; i + 1 < faces.size(); ++i) {
    if (faces[i].size() != 2 || faces[i + 1].size() != 2) {
      ok = false;
      continue;
    }
    double h = 0.0;
    for (int t = 0; t < 2; ++t) h = std::max(h, hausdorff_facets(faces[i][static_cast<std::size_t>(t)], faces[i + 1][static_cast<std::size_t>(t)]));
    dist.push_back(h);
  }
  d << "successive Hausdorff distances";
  for (double h : dist) d << " " << fmt(h);
  for (std::size_t i = 0; i + 1 < dist.size(); ++i) ok = ok && dist[i + 1] < dist[i];
  return {ok && dist.size() == 3, d.str()};
}

Outcome ac10() {
  const auto R = run_example("skew-linear");
  const bool ok = R.report.partition.evaluated && R.report.partition.forward_closed && R.report.partition.witnesses.empty();
  std::ostringstream d;
  d << "forward_closed " << R.report.partition.forward_closed << ", witnesses " << R.report.partition.witnesses.size()
    << ", hull " << R.hull.vertices.size() << " vertices / " << R.hull.facets.size() << " facets";
  return {ok, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9, ac10};
  int only = 0;
  if (argc == 3 && std::strcmp(argv[1], "--only") == 0) only = std::atoi(argv[2]);
  if (only < 0 || only > static_cast<int>(criteria.size()) || (argc != 1 && argc != 3)) {
    std::cerr << "usage: acceptance [--only N]\n";
    return 2;
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<int>(i) + 1 != only) continue;
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "AC" << (i + 1) << " " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
