#include <gtest/gtest.h>

#include <numbers>

#include "convtraj/sampler.hpp"

using namespace convtraj;

namespace {

TrigCurve yellow_green() {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 3), B = Eigen::MatrixXd::Zero(3, 3);
  A(0, 0) = 1;
  B(1, 1) = 1;
  A(2, 2) = 1;
  return TrigCurve(A, B, Eigen::VectorXd::Zero(3));
}

TrigCurve circle() {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 1), B = Eigen::MatrixXd::Zero(2, 1);
  A(0, 0) = 1;
  B(1, 0) = 1;
  return TrigCurve(A, B, Eigen::VectorXd::Zero(2));
}

VectorField rotation() { return VectorField({parse_polynomial("-y", 2), parse_polynomial("x", 2)}); }

}  // namespace

TEST(Sampler, HarmonicOscillator) {
  IntegrateOptions opt;
  opt.rel_tol = 1e-11;
  opt.abs_tol = 1e-13;
  opt.detect_cycle = false;
  const auto s = integrate(rotation(), Eigen::Vector2d(1, 0), 2 * std::numbers::pi, opt);
  EXPECT_EQ(s.termination, Termination::TimeLimit);
  EXPECT_LT((s.points.back() - Eigen::Vector2d(1, 0)).norm(), 1e-6);
  for (const auto& p : s.points) EXPECT_NEAR(p.norm(), 1.0, 1e-6);
}

TEST(Sampler, CycleDetection) {
  IntegrateOptions opt;
  opt.max_step = 0.05;
  const auto s = integrate(rotation(), Eigen::Vector2d(1, 0), 100.0, opt);
  EXPECT_EQ(s.termination, Termination::CycleClosed);
  EXPECT_TRUE(s.closed);
  EXPECT_NEAR(s.params.back(), 2 * std::numbers::pi, 0.06);
  EXPECT_LE((s.points.front() - s.points.back()).norm(), 2 * s.eps_estimate);
}

TEST(Sampler, MaxGapDenseOutput) {
  IntegrateOptions opt;
  opt.max_gap = 0.01;
  opt.detect_cycle = false;
  const auto s = integrate(rotation(), Eigen::Vector2d(1, 0), 3.0, opt);
  EXPECT_LE(max_consecutive_gap(s), 0.01 + 1e-12);
  for (const auto& p : s.points) EXPECT_NEAR(p.norm(), 1.0, 1e-6);
}

TEST(Sampler, CurveSystemStopsAtSingularPoint) {
  const auto f1 = parse_polynomial("x^2 - y^2 - x*z", 3), f2 = parse_polynomial("z - 4x^3 + 3x", 3);
  const auto phi = jacobian_minor_field({f1, f2});
  const auto s = integrate(phi, Eigen::Vector3d(1, 0, 1), 200.0);
  EXPECT_EQ(s.termination, Termination::Stalled);
  EXPECT_LT(s.points.back().norm(), 1e-3);
  for (const auto& p : s.points) {
    EXPECT_LT(std::abs(f1.evaluate(p)), 1e-6);
    EXPECT_LT(std::abs(f2.evaluate(p)), 1e-6);
  }
}

TEST(Sampler, VanDeVusseSteadyState) {
  const ReactionNetwork net(4, {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {2, 0, 0, 0}, {0, 0, 0, 1}},
                            {{0, 1, 1.0}, {1, 2, 1.0}, {3, 4, 10.0}});
  const auto s = integrate(crn_field(net), Eigen::Vector4d(1, 0, 0, 0), 200.0);
  EXPECT_EQ(s.termination, Termination::Stalled);
  EXPECT_LT((s.points.back() - Eigen::Vector4d(0, 0, 0.1522, 0.4238)).norm(), 5e-3);
  const auto red = affine_span_reduce(s);
  EXPECT_EQ(red.reduced.dimension, 3);
}

TEST(Sampler, TighterToleranceMovesTowardReference) {
  const auto phi = hamiltonian_field(parse_polynomial("x^4 + y^4 - x^2 + 0.5x*y", 2));
  IntegrateOptions ref;
  ref.rel_tol = 1e-13;
  ref.abs_tol = 1e-15;
  ref.detect_cycle = false;
  const Eigen::VectorXd target = integrate(phi, Eigen::Vector2d(0.9, 0.1), 5.0, ref).points.back();
  double prev = std::numeric_limits<double>::infinity();
  for (double rt : {1e-5, 5e-6, 2.5e-6, 1.25e-6}) {
    IntegrateOptions o;
    o.rel_tol = rt;
    o.abs_tol = rt * 1e-2;
    o.detect_cycle = false;
    const double d = (integrate(phi, Eigen::Vector2d(0.9, 0.1), 5.0, o).points.back() - target).norm();
    EXPECT_LE(d, prev);
    prev = d;
  }
}

TEST(Sampler, ErrorsAreReported) {
  EXPECT_THROW(integrate(VectorField({parse_polynomial("x^2", 1)}), Eigen::VectorXd::Ones(1), 10.0), Error);
  try {
    integrate(VectorField({parse_polynomial("x^2", 1)}), Eigen::VectorXd::Ones(1), 10.0);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Numerical);
  }
  EXPECT_THROW(integrate(rotation(), Eigen::Vector2d(0, 0), 1.0), Error);
  EXPECT_THROW(integrate(rotation(), Eigen::Vector2d(1, 0), -1.0), Error);
}

TEST(Sampler, ParametricSamples) {
  const auto four = sample_parametric(circle(), 4);
  ASSERT_EQ(four.size(), 4u);
  EXPECT_LT((four.points[1] - Eigen::Vector2d(0, 1)).norm(), 1e-15);
  EXPECT_LT((four.points[2] - Eigen::Vector2d(-1, 0)).norm(), 1e-15);
  EXPECT_TRUE(four.closed);
  EXPECT_EQ(sample_parametric(circle(), 3).size(), 3u);
  EXPECT_THROW(sample_parametric(circle(), 2), Error);

  const int N = 37;
  EXPECT_NEAR(sample_parametric(circle(), N).eps_estimate, std::sin(std::numbers::pi / N), 1e-14);

  const auto yg = sample_parametric(yellow_green(), 100);
  double widest = 0;
  for (int k = 0; k < 100; ++k)
    widest = std::max(widest, (trig_point(yellow_green(), (k + 1) / 100.0) - trig_point(yellow_green(), k / 100.0)).norm());
  EXPECT_NEAR(yg.eps_estimate, widest / 2, 1e-14);
  EXPECT_LT(yg.eps_estimate, 0.12);
  for (int k = 0; k < 100; ++k) {
    const double t = k / 100.0;
    const Eigen::Vector3d want(std::cos(2 * std::numbers::pi * t), std::sin(4 * std::numbers::pi * t),
                               std::cos(6 * std::numbers::pi * t));
    EXPECT_LT((yg.points[static_cast<std::size_t>(k)] - want).norm(), 1e-14);
    EXPECT_LT((trig_point(yellow_green(), t + 3.0) - want).norm(), 1e-12);
  }
}

TEST(Sampler, EpsilonOpenPair) {
  const auto s = make_sample({Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)}, {0.0, 1.0}, false);
  EXPECT_DOUBLE_EQ(s.eps_estimate, 0.5);
  EXPECT_THROW(make_sample({Eigen::Vector2d(0, 0)}, {0.0}, false), Error);
}

TEST(Sampler, AffineReduction) {
  std::vector<Eigen::VectorXd> pts;
  std::vector<double> ts;
  for (int k = 0; k < 50; ++k) {
    const double a = 2 * std::numbers::pi * k / 50;
    pts.push_back(Eigen::Vector3d(std::cos(a), std::sin(a), 0.0));
    ts.push_back(k);
  }
  const auto planar = make_sample(pts, ts, true);
  const auto r = affine_span_reduce(planar);
  EXPECT_EQ(r.reduced.dimension, 2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_LT((r.lift(r.reduced.points[i]) - pts[i]).norm(), 1e-8);
    for (std::size_t j = 0; j < i; ++j)
      EXPECT_NEAR((r.reduced.points[i] - r.reduced.points[j]).norm(), (pts[i] - pts[j]).norm(), 1e-8);
  }
  EXPECT_EQ(affine_span_reduce(sample_parametric(yellow_green(), 100)).reduced.dimension, 3);
  std::vector<Eigen::VectorXd> line{Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(2, 2, 2)};
  EXPECT_THROW(affine_span_reduce(make_sample(line, {0, 1, 2}, false)), Error);
}

TEST(Sampler, ReducedFieldMatchesProjection) {
  const ReactionNetwork net(4, {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {2, 0, 0, 0}, {0, 0, 0, 1}},
                            {{0, 1, 1.0}, {1, 2, 1.0}, {3, 4, 10.0}});
  const auto phi = crn_field(net);
  const auto s = integrate(phi, Eigen::Vector4d(1, 0, 0, 0), 50.0);
  const auto r = affine_span_reduce(s);
  const auto red = phi.reduced(r.basis, r.offset);
  for (std::size_t i = 0; i < s.size(); i += 17) {
    const Eigen::VectorXd want = r.basis.transpose() * phi.evaluate(s.points[i]);
    EXPECT_LT((red.evaluate(r.reduced.points[i]) - want).norm(), 1e-8);
  }
}
