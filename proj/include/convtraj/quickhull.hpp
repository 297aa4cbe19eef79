#pragma once
/**
 * Incremental beneath-beyond hull for dimensions 2 to 4 with exact
 * orientation signs: a floating-point Leibniz determinant is trusted when it
 * clears a magnitude filter, otherwise the sign is recomputed in rational
 * arithmetic.
 */

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "convtraj/error.hpp"
#include "convtraj/polytope.hpp"

namespace convtraj {

namespace detail {

/// Sign of det of the (d+1)x(d+1) matrix with rows (p_i, 1).
inline int orientation(const std::vector<const Eigen::VectorXd*>& rows) {
  const int m = static_cast<int>(rows.size());
  auto entry = [&](int r, int c) { return c + 1 == m ? 1.0 : (*rows[static_cast<std::size_t>(r)])(c); };

  std::array<int, 5> perm{};
  std::iota(perm.begin(), perm.begin() + m, 0);
  double det = 0.0, mag = 0.0;
  do {
    double prod = 1.0;
    for (int r = 0; r < m; ++r) prod *= entry(r, perm[static_cast<std::size_t>(r)]);
    int inv = 0;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) inv += perm[static_cast<std::size_t>(i)] > perm[static_cast<std::size_t>(j)] ? 1 : 0;
    det += (inv % 2 ? -prod : prod);
    mag += std::abs(prod);
  } while (std::next_permutation(perm.begin(), perm.begin() + m));
  if (std::abs(det) > 1e-12 * mag) return det > 0 ? 1 : -1;
  if (mag == 0.0) return 0;

  using Q = boost::multiprecision::cpp_rational;
  std::vector<std::vector<Q>> a(static_cast<std::size_t>(m), std::vector<Q>(static_cast<std::size_t>(m)));
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = Q(entry(r, c));
  int sign = 1;
  for (int c = 0; c < m; ++c) {
    int piv = -1;
    for (int r = c; r < m; ++r) {
      if (a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] != 0) {
        piv = r;
        break;
      }
    }
    if (piv < 0) return 0;
    if (piv != c) {
      std::swap(a[static_cast<std::size_t>(piv)], a[static_cast<std::size_t>(c)]);
      sign = -sign;
    }
    const Q& p = a[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
    if (p < 0) sign = -sign;
    for (int r = c + 1; r < m; ++r) {
      if (a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] == 0) continue;
      const Q f = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] / p;
      for (int k = c; k < m; ++k)
        a[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] -= f * a[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
    }
  }
  return sign;
}

class BeneathBeyond {
 public:
  struct Face {
    std::vector<int> v;   // d point indices
    std::vector<int> nb;  // neighbour opposite v[i]
    std::vector<int> outside;
    Eigen::VectorXd normal;
    double offset = 0.0;
    bool alive = true;
  };

  BeneathBeyond(const std::vector<Eigen::VectorXd>& pts, std::vector<int> active) : P_(pts), d_(0) {
    if (active.empty()) throw bad_input("hull: no points");
    d_ = static_cast<int>(pts[static_cast<std::size_t>(active.front())].size());
    if (d_ < 2 || d_ > 4) throw bad_input("hull oracle supports dimensions 2 to 4");
    build(std::move(active));
  }

  int dimension() const { return d_; }
  const std::vector<Face>& faces() const { return F_; }
  const Eigen::VectorXd& interior() const { return c_; }

  int orient_face(const std::vector<int>& v, const Eigen::VectorXd& q) const {
    std::vector<const Eigen::VectorXd*> rows;
    for (int i : v) rows.push_back(&P_[static_cast<std::size_t>(i)]);
    rows.push_back(&q);
    return orientation(rows);
  }

 private:
  void set_plane(Face& f) {
    Eigen::MatrixXd M(d_ - 1, d_);
    const auto& p0 = P_[static_cast<std::size_t>(f.v[0])];
    for (int i = 1; i < d_; ++i) M.row(i - 1) = (P_[static_cast<std::size_t>(f.v[static_cast<std::size_t>(i)])] - p0).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
    Eigen::VectorXd nrm = svd.matrixV().col(d_ - 1);
    if (nrm.dot(c_ - p0) > 0) nrm = -nrm;
    f.normal = nrm;
    f.offset = nrm.dot(p0);
  }

  void orient_outward(Face& f) {
    const int s = orient_face(f.v, c_);
    if (s == 0) throw numerical("hull: degenerate facet");
    if (s > 0) std::swap(f.v[0], f.v[1]);
  }

  bool visible(const Face& f, int p) const { return orient_face(f.v, P_[static_cast<std::size_t>(p)]) > 0; }

  void build(std::vector<int> active) {
    // Initial simplex by greedy distance to the current affine span.
    std::vector<int> simplex;
    int first = active.front();
    for (int i : active) {
      if (P_[static_cast<std::size_t>(i)](0) < P_[static_cast<std::size_t>(first)](0)) first = i;
    }
    simplex.push_back(first);
    const double scale = coordinate_scale(P_);
    while (static_cast<int>(simplex.size()) < d_ + 1) {
      const auto& o = P_[static_cast<std::size_t>(simplex[0])];
      Eigen::MatrixXd Bm(d_, static_cast<Eigen::Index>(simplex.size() - 1));
      for (std::size_t j = 1; j < simplex.size(); ++j) Bm.col(static_cast<Eigen::Index>(j - 1)) = P_[static_cast<std::size_t>(simplex[j])] - o;
      Eigen::MatrixXd Qm;
      if (Bm.cols() > 0) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(Bm);
        Qm = qr.householderQ() * Eigen::MatrixXd::Identity(d_, Bm.cols());
      }
      int best = -1;
      double bd = 0.0;
      for (int i : active) {
        Eigen::VectorXd r = P_[static_cast<std::size_t>(i)] - o;
        if (Qm.cols() > 0) r -= Qm * (Qm.transpose() * r);
        if (r.norm() > bd) {
          bd = r.norm();
          best = i;
        }
      }
      if (best < 0 || bd <= 1e-12 * scale) throw bad_input("degenerate point set: affine span has dimension " +
                                                            std::to_string(simplex.size() - 1));
      simplex.push_back(best);
    }
    {
      std::vector<const Eigen::VectorXd*> rows;
      for (int i : simplex) rows.push_back(&P_[static_cast<std::size_t>(i)]);
      if (orientation(rows) == 0) throw bad_input("degenerate point set");
    }
    c_ = Eigen::VectorXd::Zero(d_);
    for (int i : simplex) c_ += P_[static_cast<std::size_t>(i)];
    c_ /= static_cast<double>(d_ + 1);

    for (int i = 0; i <= d_; ++i) {
      Face f;
      for (int j = 0; j <= d_; ++j) {
        if (j != i) f.v.push_back(simplex[static_cast<std::size_t>(j)]);
      }
      F_.push_back(std::move(f));
    }
    for (int i = 0; i <= d_; ++i) {
      Face& f = F_[static_cast<std::size_t>(i)];
      orient_outward(f);
      f.nb.assign(static_cast<std::size_t>(d_), -1);
      for (int k = 0; k < d_; ++k) {
        const int vk = f.v[static_cast<std::size_t>(k)];
        const auto pos = std::find(simplex.begin(), simplex.end(), vk) - simplex.begin();
        f.nb[static_cast<std::size_t>(k)] = static_cast<int>(pos);
      }
      set_plane(f);
    }
    std::vector<char> used(P_.size(), 0);
    for (int i : simplex) used[static_cast<std::size_t>(i)] = 1;
    for (int p : active) {
      if (used[static_cast<std::size_t>(p)]) continue;
      for (auto& f : F_) {
        if (visible(f, p)) {
          f.outside.push_back(p);
          break;
        }
      }
    }

    std::vector<int> work;
    for (int i = 0; i <= d_; ++i) work.push_back(i);
    while (!work.empty()) {
      const int fi = work.back();
      work.pop_back();
      if (!F_[static_cast<std::size_t>(fi)].alive || F_[static_cast<std::size_t>(fi)].outside.empty()) continue;
      add_point(fi, work);
    }
  }

  void add_point(int fi, std::vector<int>& work) {
    // Farthest outside point.
    const Face& f0 = F_[static_cast<std::size_t>(fi)];
    int p = f0.outside.front();
    double far = -1.0;
    for (int q : f0.outside) {
      const double dist = f0.normal.dot(P_[static_cast<std::size_t>(q)]) - f0.offset;
      if (dist > far) {
        far = dist;
        p = q;
      }
    }
    const Eigen::VectorXd& pp = P_[static_cast<std::size_t>(p)];

    std::vector<int> vis{fi};
    std::map<int, char> state{{fi, 1}};
    for (std::size_t k = 0; k < vis.size(); ++k) {
      const Face& f = F_[static_cast<std::size_t>(vis[k])];
      for (int nbi : f.nb) {
        if (state.count(nbi)) continue;
        const bool v = orient_face(F_[static_cast<std::size_t>(nbi)].v, pp) > 0;
        state[nbi] = v ? 1 : 0;
        if (v) vis.push_back(nbi);
      }
    }

    std::vector<int> created;
    std::map<std::vector<int>, std::pair<int, int>> ridges;  // ridge -> (face, slot)
    for (int vf : vis) {
      for (int k = 0; k < d_; ++k) {
        const int other = F_[static_cast<std::size_t>(vf)].nb[static_cast<std::size_t>(k)];
        if (state[other]) continue;
        Face nf;
        nf.v = F_[static_cast<std::size_t>(vf)].v;
        nf.v[static_cast<std::size_t>(k)] = p;
        orient_outward(nf);
        nf.nb.assign(static_cast<std::size_t>(d_), -1);
        const int id = static_cast<int>(F_.size());
        const auto slot_p = std::find(nf.v.begin(), nf.v.end(), p) - nf.v.begin();
        nf.nb[static_cast<std::size_t>(slot_p)] = other;
        auto& of = F_[static_cast<std::size_t>(other)];
        for (auto& x : of.nb) {
          if (x == vf) x = id;
        }
        set_plane(nf);
        for (int s = 0; s < d_; ++s) {
          if (s == slot_p) continue;
          std::vector<int> key;
          for (int t = 0; t < d_; ++t) {
            if (t != s) key.push_back(nf.v[static_cast<std::size_t>(t)]);
          }
          std::sort(key.begin(), key.end());
          auto it = ridges.find(key);
          if (it == ridges.end()) {
            ridges.emplace(key, std::make_pair(id, s));
          } else {
            nf.nb[static_cast<std::size_t>(s)] = it->second.first;
            F_[static_cast<std::size_t>(it->second.first)].nb[static_cast<std::size_t>(it->second.second)] = id;
            ridges.erase(it);
          }
        }
        F_.push_back(std::move(nf));
        created.push_back(id);
      }
    }
    if (!ridges.empty()) throw numerical("hull: inconsistent horizon");

    std::vector<int> orphans;
    for (int vf : vis) {
      auto& f = F_[static_cast<std::size_t>(vf)];
      f.alive = false;
      for (int q : f.outside) {
        if (q != p) orphans.push_back(q);
      }
      f.outside.clear();
      f.outside.shrink_to_fit();
    }
    for (int q : orphans) {
      for (int id : created) {
        if (visible(F_[static_cast<std::size_t>(id)], q)) {
          F_[static_cast<std::size_t>(id)].outside.push_back(q);
          break;
        }
      }
    }
    for (int id : created) {
      if (!F_[static_cast<std::size_t>(id)].outside.empty()) work.push_back(id);
    }
  }

  const std::vector<Eigen::VectorXd>& P_;
  int d_;
  Eigen::VectorXd c_;
  std::vector<Face> F_;
};

}  // namespace detail

/// Exact-predicate hull of points in dimension 2 to 4.
inline PolytopeData quickhull_oracle(const std::vector<Eigen::VectorXd>& points, double eps = 1e-9) {
  if (points.empty()) throw bad_input("hull: no points");
  const int d = static_cast<int>(points.front().size());
  for (const auto& p : points) {
    if (p.size() != d || !p.allFinite()) throw bad_input("hull: inconsistent or non-finite points");
  }
  if (static_cast<int>(points.size()) < d + 1) throw bad_input("degenerate point set: fewer than n+1 points");
  const auto kept = dedupe_points(points, 1e-12 * detail::coordinate_scale(points));
  detail::BeneathBeyond bb(points, kept);

  std::vector<char> is_vertex(points.size(), 0);
  std::vector<Eigen::VectorXd> normals;
  for (const auto& f : bb.faces()) {
    if (!f.alive) continue;
    for (int v : f.v) is_vertex[static_cast<std::size_t>(v)] = 1;
    normals.push_back(f.normal);
  }
  std::vector<Eigen::VectorXd> verts;
  std::vector<int> src;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (is_vertex[i]) {
      verts.push_back(points[i]);
      src.push_back(static_cast<int>(i));
    }
  }
  return finalize_polytope(verts, src, normals, eps);
}

/// Volume of the convex hull of points (dimension 2 to 4).
inline double hull_volume(const std::vector<Eigen::VectorXd>& points) {
  const int d = static_cast<int>(points.front().size());
  std::vector<int> all(points.size());
  std::iota(all.begin(), all.end(), 0);
  detail::BeneathBeyond bb(points, all);
  double vol = 0.0;
  double fact = 1.0;
  for (int i = 2; i <= d; ++i) fact *= i;
  for (const auto& f : bb.faces()) {
    if (!f.alive) continue;
    Eigen::MatrixXd M(d, d);
    for (int i = 0; i < d; ++i) M.col(i) = points[static_cast<std::size_t>(f.v[static_cast<std::size_t>(i)])] - bb.interior();
    vol += std::abs(M.determinant()) / fact;
  }
  return vol;
}

}  // namespace convtraj
