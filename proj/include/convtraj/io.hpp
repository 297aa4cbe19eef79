#pragma once

// File formats: CSV samples, OFF meshes and JSON hulls. Every format carries
// a versioned schema tag so readers can reject files they do not understand.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "convtraj/error.hpp"
#include "convtraj/polytope.hpp"
#include "convtraj/sampler.hpp"

namespace convtraj {

using json = nlohmann::json;

inline constexpr const char* kSampleSchema = "convtraj.sample/1";
inline constexpr const char* kMeshSchema = "convtraj.mesh/1";
inline constexpr const char* kHullSchema = "convtraj.hull/1";

inline std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void require_schema(const json& j, const char* schema) {
  if (!j.is_object() || !j.contains("schema") || j.at("schema") != schema)
    throw bad_input(std::string("expected schema ") + schema);
}

inline Termination termination_from_string(const std::string& s) {
  for (auto t : {Termination::None, Termination::TimeLimit, Termination::Stalled, Termination::CycleClosed})
    if (to_string(t) == s) return t;
  throw bad_input("unknown termination '" + s + "'");
}

// ---------------------------------------------------------------------------
// CSV samples

inline void write_sample_csv(std::ostream& os, const CurveSample& s) {
  os << "# " << kSampleSchema << " dimension=" << s.dimension << " closed=" << (s.closed ? 1 : 0)
     << " termination=" << to_string(s.termination) << "\n";
  os << "t";
  for (int j = 1; j <= s.dimension; ++j) os << ",x" << j;
  os << "\n";
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    os << format_double(s.params[i]);
    for (int j = 0; j < s.dimension; ++j) os << "," << format_double(s.points[i](j));
    os << "\n";
  }
}

inline CurveSample read_sample_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(std::string("# ") + kSampleSchema, 0) != 0)
    throw bad_input(std::string("sample csv: missing '# ") + kSampleSchema + "' header");
  int dim = -1;
  bool closed = false;
  Termination term = Termination::None;
  {
    std::istringstream hs(line.substr(2 + std::string(kSampleSchema).size()));
    std::string kv;
    while (hs >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw bad_input("sample csv: malformed header field '" + kv + "'");
      const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
      if (key == "dimension") dim = std::stoi(val);
      else if (key == "closed") closed = val == "1";
      else if (key == "termination") term = termination_from_string(val);
    }
  }
  if (dim < 1) throw bad_input("sample csv: header lacks a positive dimension");
  if (!std::getline(in, line)) throw bad_input("sample csv: missing column header");
  std::vector<Eigen::VectorXd> pts;
  std::vector<double> ts;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size() && cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw bad_input("sample csv: bad number '" + cell + "'");
      }
    }
    if (static_cast<int>(row.size()) != dim + 1) throw bad_input("sample csv: row has wrong column count");
    ts.push_back(row[0]);
    pts.push_back(Eigen::Map<Eigen::VectorXd>(row.data() + 1, dim));
  }
  CurveSample s = make_sample(std::move(pts), std::move(ts), closed);
  s.termination = term;
  return s;
}

// ---------------------------------------------------------------------------
// OFF meshes (n = 2 as a flat polygon, n = 3 as the facet polygons)

/// Facet vertices of a 3-polytope in counter-clockwise order seen from outside.
inline std::vector<int> ordered_facet(const PolytopeData& P, const Facet& f) {
  const auto& V = P.vertices;
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (int v : f.vertices) c += V[static_cast<std::size_t>(v)].head<3>();
  c /= static_cast<double>(f.vertices.size());
  const Eigen::Vector3d nrm = f.normal.head<3>();
  Eigen::Vector3d e1 = (V[static_cast<std::size_t>(f.vertices[0])].head<3>() - c);
  e1 = (e1 - e1.dot(nrm) * nrm).normalized();
  const Eigen::Vector3d e2 = nrm.cross(e1);
  std::vector<std::pair<double, int>> ang;
  for (int v : f.vertices) {
    const Eigen::Vector3d d = V[static_cast<std::size_t>(v)].head<3>() - c;
    ang.emplace_back(std::atan2(d.dot(e2), d.dot(e1)), v);
  }
  std::sort(ang.begin(), ang.end());
  std::vector<int> out;
  for (const auto& a : ang) out.push_back(a.second);
  return out;
}

inline void write_off(std::ostream& os, const PolytopeData& P) {
  if (P.dimension != 2 && P.dimension != 3) throw bad_input("OFF export needs a 2- or 3-dimensional hull");
  os << "OFF\n# " << kMeshSchema << "\n";
  std::vector<std::vector<int>> faces;
  if (P.dimension == 3) {
    for (const auto& f : P.facets) faces.push_back(ordered_facet(P, f));
  } else {
    // Walk the boundary cycle through the adjacency lists.
    std::vector<int> cyc{0};
    int prev = -1, cur = 0;
    while (cyc.size() < P.vertices.size()) {
      const auto& nb = P.adjacency[static_cast<std::size_t>(cur)];
      const int next = nb[0] != prev ? nb[0] : nb[1];
      prev = cur;
      cur = next;
      cyc.push_back(cur);
    }
    faces.push_back(cyc);
  }
  os << P.vertices.size() << " " << faces.size() << " 0\n";
  for (const auto& v : P.vertices) {
    for (int j = 0; j < 3; ++j) os << (j ? " " : "") << format_double(j < P.dimension ? v(j) : 0.0);
    os << "\n";
  }
  for (const auto& f : faces) {
    os << f.size();
    for (int v : f) os << " " << v;
    os << "\n";
  }
}

struct OffMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::vector<int>> faces;
};

inline OffMesh read_off(std::istream& in) {
  // Comments run to end of line; strip them before tokenising.
  std::ostringstream body;
  std::string line;
  bool saw_schema = false;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      if (line.find(kMeshSchema, hash) != std::string::npos) saw_schema = true;
      line.erase(hash);
    }
    body << line << "\n";
  }
  if (!saw_schema) throw bad_input(std::string("OFF: missing schema comment ") + kMeshSchema);
  std::istringstream ts(body.str());
  std::string magic;
  std::size_t nv = 0, nf = 0, ne = 0;
  if (!(ts >> magic) || magic != "OFF" || !(ts >> nv >> nf >> ne)) throw bad_input("OFF: malformed header");
  OffMesh m;
  for (std::size_t i = 0; i < nv; ++i) {
    Eigen::Vector3d v;
    if (!(ts >> v.x() >> v.y() >> v.z())) throw bad_input("OFF: truncated vertex list");
    m.vertices.push_back(v);
  }
  for (std::size_t i = 0; i < nf; ++i) {
    std::size_t k = 0;
    if (!(ts >> k)) throw bad_input("OFF: truncated face list");
    std::vector<int> f(k);
    for (auto& v : f)
      if (!(ts >> v) || v < 0 || static_cast<std::size_t>(v) >= nv) throw bad_input("OFF: bad face index");
    m.faces.push_back(std::move(f));
  }
  return m;
}

// ---------------------------------------------------------------------------
// JSON hulls

inline json hull_to_json(const PolytopeData& P) {
  json j{{"schema", kHullSchema}, {"dimension", P.dimension}, {"eps", P.eps}, {"source", P.source},
         {"adjacency", P.adjacency}};
  j["vertices"] = json::array();
  for (const auto& v : P.vertices) j["vertices"].push_back(to_std(v));
  j["facets"] = json::array();
  for (const auto& f : P.facets)
    j["facets"].push_back({{"normal", to_std(f.normal)}, {"offset", f.offset}, {"vertices", f.vertices}});
  j["stats"] = {{"vertices", P.vertices.size()},
                {"facets", P.facets.size()},
                {"edges", P.edge_count()},
                {"incidence_nonzeros", P.incidence_nonzeros()},
                {"adjacency_nonzeros", P.adjacency_nonzeros()}};
  return j;
}

inline PolytopeData hull_from_json(const json& j) {
  require_schema(j, kHullSchema);
  try {
    PolytopeData P;
    P.dimension = j.at("dimension").get<int>();
    P.eps = j.at("eps").get<double>();
    P.source = j.at("source").get<std::vector<int>>();
    P.adjacency = j.at("adjacency").get<std::vector<std::vector<int>>>();
    for (const auto& v : j.at("vertices")) P.vertices.push_back(to_eigen(v.get<std::vector<double>>()));
    for (const auto& f : j.at("facets"))
      P.facets.push_back({to_eigen(f.at("normal").get<std::vector<double>>()), f.at("offset").get<double>(),
                          f.at("vertices").get<std::vector<int>>()});
    for (const auto& v : P.vertices)
      if (v.size() != P.dimension) throw bad_input("hull json: vertex dimension mismatch");
    return P;
  } catch (const json::exception& e) {
    throw bad_input(std::string("hull json: ") + e.what());
  }
}

}  // namespace convtraj
