#pragma once
/**
 * Finite samples of trajectories and closed parametric curves.
 *
 * Trajectories are integrated with the Dormand-Prince 5(4) pair; every accepted
 * step contributes one point. Optional cubic Hermite dense output fills in
 * points so that consecutive samples are at most max_gap apart.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "convtraj/error.hpp"
#include "convtraj/systems.hpp"

namespace convtraj {

enum class Termination { None, TimeLimit, Stalled, CycleClosed };

inline std::string to_string(Termination t) {
  switch (t) {
    case Termination::TimeLimit: return "t_end";
    case Termination::Stalled: return "stalled";
    case Termination::CycleClosed: return "cycle_closed";
    default: return "none";
  }
}

struct CurveSample {
  int dimension = 0;
  std::vector<Eigen::VectorXd> points;
  std::vector<double> params;
  bool closed = false;
  double eps_estimate = 0.0;
  Termination termination = Termination::None;

  std::size_t size() const { return points.size(); }

  Eigen::MatrixXd matrix() const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(points.size()), dimension);
    for (std::size_t i = 0; i < points.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = points[i].transpose();
    return m;
  }
};

/// Largest distance between consecutive points, including the wrap-around gap for closed samples.
inline double max_consecutive_gap(const CurveSample& s) {
  double g = 0.0;
  for (std::size_t i = 1; i < s.points.size(); ++i) g = std::max(g, (s.points[i] - s.points[i - 1]).norm());
  if (s.closed && s.points.size() > 1) g = std::max(g, (s.points.front() - s.points.back()).norm());
  return g;
}

inline double estimate_epsilon(const CurveSample& s) {
  if (s.points.size() < 2) throw bad_input("insufficient sample: need at least two points");
  return 0.5 * max_consecutive_gap(s);
}

inline void check_sample(const CurveSample& s) {
  if (s.points.size() < 2) throw bad_input("insufficient sample: need at least two points");
  if (s.params.size() != s.points.size()) throw bad_input("sample: params and points differ in length");
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    if (s.points[i].size() != s.dimension) throw bad_input("sample: point dimension mismatch");
    if (!s.points[i].allFinite()) throw bad_input("sample: non-finite coordinate");
    if (i > 0 && !(s.params[i] > s.params[i - 1])) throw bad_input("sample: params must be strictly increasing");
  }
}

inline CurveSample make_sample(std::vector<Eigen::VectorXd> points, std::vector<double> params, bool closed) {
  CurveSample s;
  s.dimension = points.empty() ? 0 : static_cast<int>(points.front().size());
  s.points = std::move(points);
  s.params = std::move(params);
  s.closed = closed;
  check_sample(s);
  s.eps_estimate = estimate_epsilon(s);
  return s;
}

inline CurveSample sample_parametric(const TrigCurve& c, int N) {
  if (N < 3) throw bad_input("insufficient sample: need at least 3 parameter values");
  std::vector<Eigen::VectorXd> pts;
  std::vector<double> ts;
  for (int k = 0; k < N; ++k) {
    const double t = static_cast<double>(k) / N;
    pts.push_back(trig_point(c, t));
    ts.push_back(t);
  }
  return make_sample(std::move(pts), std::move(ts), true);
}

struct IntegrateOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();  // cap on the time step
  double max_gap = 0.0;                                       // cap on spatial gaps, 0 = off
  double stall_tol = 1e-10;
  // Stop at a local minimum of |phi| once it is below stall_rel_tol times the
  // largest speed seen. Near a saddle on the curve, rounding pushes the orbit
  // out again long before |phi| reaches stall_tol. 0 disables the check.
  double stall_rel_tol = 1e-4;
  double blowup_bound = 1e8;
  bool detect_cycle = true;
  double min_period = 0.0;
  long max_steps = 5'000'000;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DoPri {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
};

// Cubic Hermite interpolant on [t0, t0 + h] at fraction s.
inline Eigen::VectorXd hermite(const Eigen::VectorXd& y0, const Eigen::VectorXd& f0, const Eigen::VectorXd& y1,
                               const Eigen::VectorXd& f1, double h, double s) {
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1;
}

// Flattened field for fast repeated evaluation.
class CompiledField {
 public:
  explicit CompiledField(const VectorField& phi) : n_(phi.dimension()) {
    for (int i = 0; i < n_; ++i) {
      for (const auto& [e, c] : phi[i].terms()) {
        terms_.push_back({i, c, static_cast<int>(exps_.size())});
        for (int v : e) {
          exps_.push_back(v);
          max_exp_ = std::max(max_exp_, v);
        }
      }
    }
    pow_.resize(static_cast<std::size_t>(n_) * static_cast<std::size_t>(max_exp_ + 1));
  }

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const {
    const std::size_t stride = static_cast<std::size_t>(max_exp_ + 1);
    for (int j = 0; j < n_; ++j) {
      double p = 1.0;
      for (int e = 0; e <= max_exp_; ++e) {
        pow_[static_cast<std::size_t>(j) * stride + static_cast<std::size_t>(e)] = p;
        p *= x(j);
      }
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_);
    for (const auto& t : terms_) {
      double v = t.coef;
      for (int j = 0; j < n_; ++j)
        v *= pow_[static_cast<std::size_t>(j) * stride + static_cast<std::size_t>(exps_[static_cast<std::size_t>(t.offset + j)])];
      out(t.component) += v;
    }
    return out;
  }

 private:
  struct Term {
    int component;
    double coef;
    int offset;
  };
  int n_;
  int max_exp_ = 0;
  std::vector<Term> terms_;
  std::vector<int> exps_;
  mutable std::vector<double> pow_;
};

}  // namespace detail

/**
 * Adaptive integration of x' = phi(x) from y0 over [0, t_end].
 *
 * Stops early when |phi| drops below stall_tol or when the orbit closes up
 * (crosses the section through y0 normal to phi(y0), close to y0, in the
 * forward direction). Throws on blow-up and step underflow.
 */
inline CurveSample integrate(const VectorField& phi, const Eigen::VectorXd& y0, double t_end,
                             const IntegrateOptions& opt = {}) {
  const int n = phi.dimension();
  if (y0.size() != n) throw bad_input("integrate: start point dimension mismatch");
  if (!(t_end > 0)) throw bad_input("integrate: t_end must be positive");
  if (!(opt.rel_tol > 0) || !(opt.abs_tol > 0)) throw bad_input("integrate: tolerances must be positive");
  if (!y0.allFinite()) throw bad_input("integrate: start point is not finite");

  using T = detail::DoPri;
  const detail::CompiledField f(phi);

  std::vector<Eigen::VectorXd> pts{y0};
  std::vector<double> ts{0.0};
  Eigen::VectorXd y = y0;
  Eigen::VectorXd k1 = f(y);
  if (k1.norm() < opt.stall_tol) throw bad_input("insufficient sample: start point is stationary");

  const Eigen::VectorXd section = k1;
  const double section_scale = section.norm();
  double section_prev = 0.0;
  bool left_start = false;
  double max_gap_seen = 0.0;
  double max_speed = k1.norm();
  double prev_speed = k1.norm();

  auto err_norm = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& e) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(a(i)), std::abs(b(i)));
      acc += (e(i) / sc) * (e(i) / sc);
    }
    return std::sqrt(acc / n);
  };

  double h = std::min({opt.max_step, t_end, 0.01 * std::max(1.0, y0.norm()) / std::max(k1.norm(), 1e-300)});
  double t = 0.0;
  Termination reason = Termination::TimeLimit;
  for (long step = 0;; ++step) {
    if (step >= opt.max_steps) throw numerical("integrate: step budget exhausted");
    h = std::min(h, t_end - t);
    if (h < 1e-14 * std::max(1.0, std::abs(t))) throw numerical("integrate: step size underflow at t = " + std::to_string(t));

    const Eigen::VectorXd k2 = f(y + h * (T::a21 * k1));
    const Eigen::VectorXd k3 = f(y + h * (T::a31 * k1 + T::a32 * k2));
    const Eigen::VectorXd k4 = f(y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3));
    const Eigen::VectorXd k5 = f(y + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4));
    const Eigen::VectorXd k6 = f(y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5));
    const Eigen::VectorXd y1 = y + h * (T::b1 * k1 + T::b3 * k3 + T::b4 * k4 + T::b5 * k5 + T::b6 * k6);
    const Eigen::VectorXd k7 = f(y1);
    const Eigen::VectorXd e = h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 + T::e7 * k7);

    const double err = y1.allFinite() ? err_norm(y, y1, e) : std::numeric_limits<double>::infinity();
    if (!(err <= 1.0)) {
      const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
      h *= fac;
      continue;
    }

    const double t1 = t + h;
    const double speed = k7.norm();
    if (opt.stall_rel_tol > 0 && speed > prev_speed && prev_speed < opt.stall_rel_tol * max_speed) {
      reason = Termination::Stalled;
      break;
    }
    // Dense fill for spatial gaps.
    if (opt.max_gap > 0) {
      const int pieces = static_cast<int>(std::ceil((y1 - y).norm() / opt.max_gap));
      for (int p = 1; p < pieces; ++p) {
        const double s = static_cast<double>(p) / pieces;
        pts.push_back(detail::hermite(y, k1, y1, k7, h, s));
        ts.push_back(t + s * h);
      }
    }

    // Return to the section through y0.
    const double sec = section.dot(y1 - y0) / section_scale;
    if (opt.detect_cycle && left_start && t1 > opt.min_period && section_prev < 0 && sec >= 0 &&
        k7.dot(section) > 0) {
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double v = section.dot(detail::hermite(y, k1, y1, k7, h, mid) - y0);
        (v < 0 ? lo : hi) = mid;
      }
      const Eigen::VectorXd cross = detail::hermite(y, k1, y1, k7, h, hi);
      const double radius = 2.0 * std::max(max_gap_seen, (y1 - y).norm()) + 1e-9;
      if ((cross - y0).norm() <= radius) {
        while (pts.size() > 1 && ts.back() >= t + hi * h) {
          pts.pop_back();
          ts.pop_back();
        }
        // The crossing point duplicates y0 up to the integration error; the
        // wrap-around gap now closes the loop.
        reason = Termination::CycleClosed;
        break;
      }
    }
    if (sec < 0) left_start = true;
    section_prev = sec;

    max_gap_seen = std::max(max_gap_seen, (y1 - pts.back()).norm());
    pts.push_back(y1);
    ts.push_back(t1);
    y = y1;
    k1 = k7;
    t = t1;
    prev_speed = speed;
    max_speed = std::max(max_speed, speed);

    if (y.norm() > opt.blowup_bound) throw numerical("integrate: trajectory diverges (|x| > blow-up bound)");
    if (k1.norm() < opt.stall_tol) {
      reason = Termination::Stalled;
      break;
    }
    if (t >= t_end) break;

    const double fac = err > 0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2))) : 5.0;
    h = std::min(h * fac, opt.max_step);
  }

  CurveSample s = make_sample(std::move(pts), std::move(ts), reason == Termination::CycleClosed);
  s.termination = reason;
  return s;
}

/**
 * Drops points closer than min_spacing to the previously kept point; the last
 * point is always kept. Trajectories converging to an equilibrium otherwise
 * pile up points whose hull facets are numerically meaningless.
 */
inline CurveSample thin_sample(const CurveSample& s, double min_spacing) {
  if (s.points.size() < 3 || !(min_spacing > 0)) return s;
  std::vector<Eigen::VectorXd> pts{s.points.front()};
  std::vector<double> par{s.params.front()};
  for (std::size_t i = 1; i + 1 < s.points.size(); ++i) {
    if ((s.points[i] - pts.back()).norm() >= min_spacing) {
      pts.push_back(s.points[i]);
      par.push_back(s.params[i]);
    }
  }
  if ((s.points.back() - pts.back()).norm() < min_spacing && pts.size() > 1) {
    pts.pop_back();
    par.pop_back();
  }
  pts.push_back(s.points.back());
  par.push_back(s.params.back());
  CurveSample out = make_sample(std::move(pts), std::move(par), s.closed);
  out.termination = s.termination;
  return out;
}

struct AffineReduction {
  CurveSample reduced;
  Eigen::MatrixXd basis;   // n x k, orthonormal columns
  Eigen::VectorXd offset;  // n

  Eigen::VectorXd lift(const Eigen::VectorXd& u) const { return offset + basis * u; }
  Eigen::VectorXd project(const Eigen::VectorXd& x) const { return basis.transpose() * (x - offset); }
};

/**
 * Coordinates of the sample in its affine span. Directions are dropped
 * (smallest singular value first) while the accumulated residual stays below
 * rank_tol, so every point is reconstructed to within rank_tol.
 */
inline AffineReduction affine_span_reduce(const CurveSample& s, double rank_tol = 1e-8) {
  check_sample(s);
  const Eigen::MatrixXd X = s.matrix();
  const Eigen::VectorXd mean = X.colwise().mean().transpose();
  const Eigen::MatrixXd centered = X.rowwise() - mean.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  int k = static_cast<int>(sv.size());
  double dropped = 0.0;
  while (k > 0 && std::sqrt(dropped + sv(k - 1) * sv(k - 1)) < rank_tol) {
    dropped += sv(k - 1) * sv(k - 1);
    --k;
  }
  if (k < 2) throw bad_input("degenerate sample: affine span has dimension " + std::to_string(k));
  Eigen::MatrixXd basis = svd.matrixV().leftCols(k);
  for (int j = 0; j < k; ++j) {
    Eigen::Index arg;
    basis.col(j).cwiseAbs().maxCoeff(&arg);
    if (basis(arg, j) < 0) basis.col(j) *= -1.0;
  }
  AffineReduction r;
  r.basis = basis;
  r.offset = mean;
  std::vector<Eigen::VectorXd> pts;
  for (const auto& p : s.points) pts.push_back(basis.transpose() * (p - mean));
  r.reduced = make_sample(std::move(pts), s.params, s.closed);
  r.reduced.termination = s.termination;
  return r;
}

}  // namespace convtraj
