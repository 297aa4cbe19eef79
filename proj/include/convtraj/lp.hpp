#pragma once
/**
 * Dense revised simplex.
 *
 * simplex_standard solves  min c^T z  s.t.  A z = b, z >= 0  and returns the
 * simplex multipliers y (A^T y <= c at optimality). lp_solve wraps it for
 * min c^T x  s.t.  B x >= a  with x free.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "convtraj/error.hpp"

namespace convtraj {

enum class LpStatus { Optimal, Infeasible, Unbounded };

class LpError : public Error {
 public:
  explicit LpError(LpStatus s)
      : Error(ErrorKind::Numerical, s == LpStatus::Infeasible ? "linear program is infeasible" : "linear program is unbounded"),
        status_(s) {}
  LpStatus status() const { return status_; }

 private:
  LpStatus status_;
};

struct SimplexOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-10;
  double pivot_tol = 1e-10;
  int refactor_every = 64;
  int degenerate_limit = 50;  // consecutive degenerate pivots before switching to Bland's rule
  long max_iterations = 100000;
};

struct SimplexResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd y;       // simplex multipliers, one per row
  std::vector<int> basis;  // basic column per row
  long iterations = 0;
};

namespace detail {

class RevisedSimplex {
 public:
  RevisedSimplex(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c, const SimplexOptions& opt)
      : A_(A), b_(b), c_(c), opt_(opt), m_(static_cast<int>(A.rows())), n_(static_cast<int>(A.cols())) {}

  // Runs phase 2 from the given basis; allowed marks columns that may enter.
  LpStatus run(std::vector<int>& basis, const std::vector<char>& allowed, long& iterations) {
    basis_ = &basis;
    std::vector<char> in_basis(static_cast<std::size_t>(n_), 0);
    for (int j : basis) in_basis[static_cast<std::size_t>(j)] = 1;
    int since_refactor = opt_.refactor_every;
    int degenerate = 0;
    bool bland = false;
    while (true) {
      if (++iterations > opt_.max_iterations) throw numerical("simplex: iteration limit reached");
      if (since_refactor >= opt_.refactor_every) {
        refactor();
        since_refactor = 0;
      }
      Eigen::VectorXd cb(m_);
      for (int i = 0; i < m_; ++i) cb(i) = c_(basis[static_cast<std::size_t>(i)]);
      const Eigen::VectorXd y = Binv_.transpose() * cb;

      const double cscale = 1.0 + c_.cwiseAbs().maxCoeff();
      int q = -1;
      double best = -opt_.optimality_tol * cscale;
      for (int j = 0; j < n_; ++j) {
        if (in_basis[static_cast<std::size_t>(j)] || !allowed[static_cast<std::size_t>(j)]) continue;
        const double r = c_(j) - A_.col(j).dot(y);
        if (r < best) {
          best = r;
          q = j;
          if (bland) break;
        }
      }
      if (q < 0) return LpStatus::Optimal;

      const Eigen::VectorXd d = Binv_ * A_.col(q);
      int r = -1;
      double theta = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        if (d(i) <= opt_.pivot_tol) continue;
        const double ratio = std::max(0.0, xb_(i)) / d(i);
        bool take = false;
        if (ratio < theta - 1e-12) {
          take = true;
        } else if (ratio <= theta + 1e-12 && r >= 0) {
          take = bland ? basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(r)] : d(i) > d(r);
        }
        if (take) {
          theta = std::min(theta, ratio);
          r = i;
        }
      }
      if (r < 0) return LpStatus::Unbounded;

      if (theta <= 1e-12) {
        if (++degenerate >= opt_.degenerate_limit) bland = true;
      } else {
        degenerate = 0;
        bland = false;
      }

      xb_ -= theta * d;
      xb_(r) = theta;
      const double piv = d(r);
      Binv_.row(r) /= piv;
      for (int i = 0; i < m_; ++i) {
        if (i != r && d(i) != 0.0) Binv_.row(i) -= d(i) * Binv_.row(r);
      }
      in_basis[static_cast<std::size_t>(basis[static_cast<std::size_t>(r)])] = 0;
      in_basis[static_cast<std::size_t>(q)] = 1;
      basis[static_cast<std::size_t>(r)] = q;
      ++since_refactor;
    }
  }

  void refactor() {
    Eigen::MatrixXd B(m_, m_);
    for (int i = 0; i < m_; ++i) B.col(i) = A_.col((*basis_)[static_cast<std::size_t>(i)]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    if (!lu.isInvertible()) throw numerical("simplex: singular basis");
    Binv_ = lu.inverse();
    xb_ = Binv_ * b_;
    for (int i = 0; i < m_; ++i) {
      if (xb_(i) < 0 && xb_(i) > -opt_.feasibility_tol * (1.0 + b_.cwiseAbs().maxCoeff())) xb_(i) = 0.0;
    }
  }

  void set_basis(std::vector<int>& basis) { basis_ = &basis; }
  const Eigen::VectorXd& xb() const { return xb_; }
  const Eigen::MatrixXd& binv() const { return Binv_; }

 private:
  const Eigen::MatrixXd& A_;
  const Eigen::VectorXd& b_;
  const Eigen::VectorXd& c_;
  SimplexOptions opt_;
  int m_, n_;
  std::vector<int>* basis_ = nullptr;
  Eigen::MatrixXd Binv_;
  Eigen::VectorXd xb_;
};

}  // namespace detail

/**
 * min c^T z s.t. A z = b, z >= 0. A warm-start basis is used when it is
 * primal feasible; otherwise phase 1 with artificial columns runs first.
 */
inline SimplexResult simplex_standard(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                                      const std::optional<std::vector<int>>& warm = std::nullopt,
                                      const SimplexOptions& opt = {}) {
  const int m = static_cast<int>(A.rows()), n = static_cast<int>(A.cols());
  if (b.size() != m || c.size() != n) throw bad_input("simplex: shape mismatch");
  SimplexResult res;
  const double bscale = 1.0 + (m > 0 ? b.cwiseAbs().maxCoeff() : 0.0);

  auto finish = [&](const Eigen::MatrixXd& Aw, const Eigen::VectorXd& bw, const Eigen::VectorXd& cw,
                    std::vector<int>& basis, const Eigen::VectorXd& row_sign) {
    Eigen::MatrixXd B(m, m);
    for (int i = 0; i < m; ++i) B.col(i) = Aw.col(basis[static_cast<std::size_t>(i)]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    const Eigen::VectorXd xb = lu.solve(bw);
    Eigen::VectorXd cb(m);
    for (int i = 0; i < m; ++i) cb(i) = cw(basis[static_cast<std::size_t>(i)]);
    const Eigen::VectorXd y = lu.transpose().solve(cb);
    res.x = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < m; ++i) {
      const int j = basis[static_cast<std::size_t>(i)];
      if (j < n) res.x(j) = std::max(0.0, xb(i));
    }
    res.value = c.dot(res.x);
    res.y = y.cwiseProduct(row_sign);
    res.basis = basis;
  };

  if (warm && static_cast<int>(warm->size()) == m) {
    std::vector<int> basis = *warm;
    std::vector<char> allowed(static_cast<std::size_t>(n), 1);
    detail::RevisedSimplex rs(A, b, c, opt);
    rs.set_basis(basis);
    bool ok = true;
    try {
      rs.refactor();
      ok = rs.xb().minCoeff() >= -opt.feasibility_tol * bscale;
    } catch (const Error&) {
      ok = false;
    }
    if (ok) {
      const LpStatus st = rs.run(basis, allowed, res.iterations);
      if (st == LpStatus::Unbounded) throw LpError(LpStatus::Unbounded);
      finish(A, b, c, basis, Eigen::VectorXd::Ones(m));
      return res;
    }
  }

  // Phase 1 on [A | I] with rows flipped so that b >= 0.
  Eigen::VectorXd sign = Eigen::VectorXd::Ones(m);
  for (int i = 0; i < m; ++i) {
    if (b(i) < 0) sign(i) = -1.0;
  }
  Eigen::MatrixXd A1(m, n + m);
  A1.leftCols(n) = sign.asDiagonal() * A;
  A1.rightCols(m) = Eigen::MatrixXd::Identity(m, m);
  const Eigen::VectorXd b1 = sign.cwiseProduct(b);
  Eigen::VectorXd c1 = Eigen::VectorXd::Zero(n + m);
  c1.tail(m).setOnes();
  std::vector<int> basis(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;
  std::vector<char> allowed(static_cast<std::size_t>(n + m), 1);
  {
    detail::RevisedSimplex rs(A1, b1, c1, opt);
    rs.set_basis(basis);
    rs.run(basis, allowed, res.iterations);
    rs.refactor();
    double infeas = 0.0;
    for (int i = 0; i < m; ++i) {
      if (basis[static_cast<std::size_t>(i)] >= n) infeas += std::max(0.0, rs.xb()(i));
    }
    if (infeas > opt.feasibility_tol * bscale) throw LpError(LpStatus::Infeasible);

    // Drive remaining artificials out of the basis where possible.
    for (int i = 0; i < m; ++i) {
      if (basis[static_cast<std::size_t>(i)] < n) continue;
      const Eigen::RowVectorXd row = rs.binv().row(i) * A1.leftCols(n);
      int best = -1;
      double mag = 1e-9;
      for (int j = 0; j < n; ++j) {
        if (std::find(basis.begin(), basis.end(), j) != basis.end()) continue;
        if (std::abs(row(j)) > mag) {
          mag = std::abs(row(j));
          best = j;
        }
      }
      if (best >= 0) {
        basis[static_cast<std::size_t>(i)] = best;
        rs.refactor();
      }
    }
  }
  for (int i = 0; i < m; ++i) allowed[static_cast<std::size_t>(n + i)] = 0;
  Eigen::VectorXd c2 = Eigen::VectorXd::Zero(n + m);
  c2.head(n) = c;
  detail::RevisedSimplex rs(A1, b1, c2, opt);
  rs.set_basis(basis);
  const LpStatus st = rs.run(basis, allowed, res.iterations);
  if (st == LpStatus::Unbounded) throw LpError(LpStatus::Unbounded);
  finish(A1, b1, c2, basis, sign);
  return res;
}

struct LpSolution {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd u;  // dual multipliers of B x >= a, u >= 0, B^T u = c
};

/// min c^T x subject to B x >= a, x free.
inline LpSolution lp_solve(const Eigen::VectorXd& c, const Eigen::MatrixXd& B, const Eigen::VectorXd& a,
                           const SimplexOptions& opt = {}) {
  const int m = static_cast<int>(B.rows()), n = static_cast<int>(B.cols());
  if (c.size() != n || a.size() != m) throw bad_input("lp_solve: shape mismatch");
  Eigen::MatrixXd A(m, 2 * n + m);
  A.leftCols(n) = B;
  A.middleCols(n, n) = -B;
  A.rightCols(m) = -Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(2 * n + m);
  cost.head(n) = c;
  cost.segment(n, n) = -c;
  const SimplexResult r = simplex_standard(A, a, cost, std::nullopt, opt);
  LpSolution s;
  s.x = r.x.head(n) - r.x.segment(n, n);
  s.value = c.dot(s.x);
  s.u = r.y.cwiseMax(0.0);
  return s;
}

}  // namespace convtraj
