#pragma once

// End-to-end runs: sample -> (affine reduce) -> hull -> patches -> partition.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "convtraj/benson.hpp"
#include "convtraj/io.hpp"
#include "convtraj/partition.hpp"
#include "convtraj/patches.hpp"

namespace convtraj {

inline constexpr const char* kSystemSchema = "convtraj.system/1";
inline constexpr const char* kReportSchema = "convtraj.report/1";

enum class SystemKind { Explicit, Hamiltonian, Algebraic, Crn, Trig, Linear };

NLOHMANN_JSON_SERIALIZE_ENUM(SystemKind, {{SystemKind::Explicit, "explicit"},
                                          {SystemKind::Hamiltonian, "hamiltonian"},
                                          {SystemKind::Algebraic, "algebraic"},
                                          {SystemKind::Crn, "crn"},
                                          {SystemKind::Trig, "trig"},
                                          {SystemKind::Linear, "linear"}})

struct RunOptions {
  double eps = 1e-9;               // Benson tolerance
  std::optional<double> delta;     // fixed proximity threshold; unset means plateau scan
  double delta_max = 2.0;          // upper end of the plateau scan
  int plateau_steps = 40;
  int grid_res = 100;              // barycentric grid for 2-faces
  int grid_res_3 = 40;             // and for 3-faces
  double tol = 1e-9;               // relative sign band
  bool reduce = false;             // work in the affine span of the sample
  double thin = 0.1;               // minimum spacing of integrated samples, as a fraction of the largest gap
  int restarts = 5;                // outward restart points to report
  bool operator==(const RunOptions&) const = default;
};

struct TrigPayload {
  std::vector<std::vector<double>> A, B;  // n x d
  std::vector<double> C;
  int samples = 100;
  bool operator==(const TrigPayload&) const = default;
};

struct SystemSpec {
  std::string name;
  SystemKind kind = SystemKind::Explicit;
  int dimension = 0;
  std::vector<std::string> field;          // explicit: one polynomial per coordinate
  std::string hamiltonian;                 // hamiltonian: h(x, y)
  std::vector<std::string> surfaces;       // algebraic: n - 1 polynomials cutting out the curve
  std::string network;                     // crn: network text
  std::vector<std::vector<double>> matrix; // linear: n x n
  std::optional<TrigPayload> trig;         // trig: the curve itself
  std::vector<std::vector<double>> starts;
  double t_end = 100.0;
  double max_gap = 0.01;
  std::vector<std::string> hooks;          // polynomials vanishing on the curve
  RunOptions options;
  bool operator==(const SystemSpec&) const = default;
};

// ---------------------------------------------------------------------------
// Report types: plain data so they serialize and compare directly.

struct SampleStats {
  std::size_t points = 0, thinned = 0;
  int dimension = 0, reduced_dimension = 0;
  std::string termination;
  double max_gap = 0.0, eps_estimate = 0.0;
  bool operator==(const SampleStats&) const = default;
};

struct HullStats {
  int dimension = 0;
  std::size_t vertices = 0, facets = 0, edges = 0, incidence_nonzeros = 0, adjacency_nonzeros = 0;
  long iterations = 0, lp_solves = 0;
  bool operator==(const HullStats&) const = default;
};

struct FaceRecord {
  std::vector<int> points;     // sample indices of the representatives
  std::vector<double> params;  // their curve parameters
  int padding = 0;
  bool operator==(const FaceRecord&) const = default;
};

struct PatchRecord {
  int k = 0, component = 0;
  std::size_t facets = 0;
  bool padded = false;
  std::vector<FaceRecord> faces;
  bool operator==(const PatchRecord&) const = default;
};

struct PatchStats {
  double delta = 0.0, plateau_lo = 0.0, plateau_hi = 0.0;
  bool plateau_stable = false;
  std::vector<int> counts;
  std::size_t arcs = 0, flagged = 0;
  int unclassified = 0;
  bool suspicious = false;
  std::vector<PatchRecord> patches;
  bool operator==(const PatchStats&) const = default;
};

struct WitnessRecord {
  std::vector<double> point, normal;
  double value = 0.0;
  int patch = 0, face = 0;
  bool operator==(const WitnessRecord&) const = default;
};

struct PartitionPatchRecord {
  int k = 0, component = 0;
  bool has_inward = false, has_outward = false, all_tangent = false;
  std::size_t edges = 0, faces = 0, skipped = 0;
  bool operator==(const PartitionPatchRecord&) const = default;
};

struct PartitionStats {
  bool evaluated = false;  // false when the spec has no vector field
  bool forward_closed = false;
  std::vector<PartitionPatchRecord> patches;
  std::vector<WitnessRecord> witnesses;
  std::vector<std::vector<double>> restart_points;
  bool operator==(const PartitionStats&) const = default;
};

struct Timings {
  double sample = 0, hull = 0, patches = 0, partition = 0;
  bool operator==(const Timings&) const = default;
};

struct RunReport {
  std::string schema = kReportSchema;
  std::string name;
  SampleStats sample;
  HullStats hull;
  PatchStats patches;
  PartitionStats partition;
  Timings timings;
  bool operator==(const RunReport&) const = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SampleStats, points, thinned, dimension, reduced_dimension, termination, max_gap,
                                   eps_estimate)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(HullStats, dimension, vertices, facets, edges, incidence_nonzeros, adjacency_nonzeros,
                                   iterations, lp_solves)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(FaceRecord, points, params, padding)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PatchRecord, k, component, facets, padded, faces)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PatchStats, delta, plateau_lo, plateau_hi, plateau_stable, counts, arcs, flagged,
                                   unclassified, suspicious, patches)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(WitnessRecord, point, normal, value, patch, face)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PartitionPatchRecord, k, component, has_inward, has_outward, all_tangent, edges, faces,
                                   skipped)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(PartitionStats, evaluated, forward_closed, patches, witnesses, restart_points)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Timings, sample, hull, patches, partition)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TrigPayload, A, B, C, samples)

inline void to_json(json& j, const RunReport& r) {
  j = json{{"schema", r.schema},   {"name", r.name},           {"sample", r.sample},
           {"hull", r.hull},       {"patches", r.patches},     {"partition", r.partition},
           {"timings", r.timings}};
}

inline void from_json(const json& j, RunReport& r) {
  require_schema(j, kReportSchema);
  j.at("name").get_to(r.name);
  j.at("sample").get_to(r.sample);
  j.at("hull").get_to(r.hull);
  j.at("patches").get_to(r.patches);
  j.at("partition").get_to(r.partition);
  if (j.contains("timings")) j.at("timings").get_to(r.timings);
}

/// Report text without timings: byte-identical across runs of the same spec.
inline std::string deterministic_dump(const RunReport& r) {
  json j = r;
  j.erase("timings");
  return j.dump(2);
}

inline void to_json(json& j, const RunOptions& o) {
  j = json{{"eps", o.eps},
           {"delta", o.delta ? json(*o.delta) : json(nullptr)},
           {"delta_max", o.delta_max},
           {"plateau_steps", o.plateau_steps},
           {"grid_res", o.grid_res},
           {"grid_res_3", o.grid_res_3},
           {"tol", o.tol},
           {"reduce", o.reduce},
           {"thin", o.thin},
           {"restarts", o.restarts}};
}

inline void from_json(const json& j, RunOptions& o) {
  o = RunOptions{};
  o.eps = j.value("eps", o.eps);
  if (j.contains("delta") && !j.at("delta").is_null()) o.delta = j.at("delta").get<double>();
  o.delta_max = j.value("delta_max", o.delta_max);
  o.plateau_steps = j.value("plateau_steps", o.plateau_steps);
  o.grid_res = j.value("grid_res", o.grid_res);
  o.grid_res_3 = j.value("grid_res_3", o.grid_res_3);
  o.tol = j.value("tol", o.tol);
  o.reduce = j.value("reduce", o.reduce);
  o.thin = j.value("thin", o.thin);
  o.restarts = j.value("restarts", o.restarts);
}

inline void to_json(json& j, const SystemSpec& s) {
  j = json{{"schema", kSystemSchema}, {"name", s.name}, {"kind", s.kind}, {"dimension", s.dimension}};
  if (!s.field.empty()) j["field"] = s.field;
  if (!s.hamiltonian.empty()) j["hamiltonian"] = s.hamiltonian;
  if (!s.surfaces.empty()) j["surfaces"] = s.surfaces;
  if (!s.network.empty()) j["network"] = s.network;
  if (!s.matrix.empty()) j["matrix"] = s.matrix;
  if (s.trig) j["trig"] = *s.trig;
  if (!s.starts.empty()) j["starts"] = s.starts;
  j["t_end"] = s.t_end;
  j["max_gap"] = s.max_gap;
  if (!s.hooks.empty()) j["hooks"] = s.hooks;
  j["options"] = s.options;
}

inline void from_json(const json& j, SystemSpec& s) {
  require_schema(j, kSystemSchema);
  s = SystemSpec{};
  s.name = j.value("name", std::string{});
  j.at("kind").get_to(s.kind);
  j.at("dimension").get_to(s.dimension);
  s.field = j.value("field", std::vector<std::string>{});
  s.hamiltonian = j.value("hamiltonian", std::string{});
  s.surfaces = j.value("surfaces", std::vector<std::string>{});
  s.network = j.value("network", std::string{});
  s.matrix = j.value("matrix", std::vector<std::vector<double>>{});
  if (j.contains("trig")) s.trig = j.at("trig").get<TrigPayload>();
  s.starts = j.value("starts", std::vector<std::vector<double>>{});
  s.t_end = j.value("t_end", s.t_end);
  s.max_gap = j.value("max_gap", s.max_gap);
  s.hooks = j.value("hooks", std::vector<std::string>{});
  if (j.contains("options")) j.at("options").get_to(s.options);
}

inline SystemSpec parse_system_spec(const std::string& text) {
  try {
    return json::parse(text).get<SystemSpec>();
  } catch (const json::exception& e) {
    throw bad_input(std::string("system spec: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

/// Error raised by a pipeline stage; the message names the stage.
class StageError : public Error {
 public:
  StageError(ErrorKind kind, std::string stage, const std::string& what)
      : Error(kind, stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

template <class F>
auto run_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(e.kind(), stage, e.what());
  } catch (const std::exception& e) {
    throw StageError(ErrorKind::Numerical, stage, e.what());
  }
}

inline Eigen::MatrixXd matrix_from_rows(const std::vector<std::vector<double>>& rows, const char* what) {
  if (rows.empty()) throw bad_input(std::string(what) + ": empty matrix");
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw bad_input(std::string(what) + ": ragged matrix");
    for (std::size_t k = 0; k < rows[i].size(); ++k) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return M;
}

inline TrigCurve trig_curve(const TrigPayload& t) {
  return TrigCurve(matrix_from_rows(t.A, "trig A"), matrix_from_rows(t.B, "trig B"), to_eigen(t.C));
}

/// Vector field of a spec, if it has one. A trig spec may borrow any of the
/// field payloads; the curve is then assumed to be one of its trajectories.
inline std::optional<VectorField> build_field(const SystemSpec& s) {
  const int n = s.dimension;
  if (!s.field.empty()) {
    if (static_cast<int>(s.field.size()) != n) throw bad_input("explicit field needs one polynomial per coordinate");
    std::vector<Polynomial> comps;
    for (const auto& f : s.field) comps.push_back(parse_polynomial(f, n));
    return VectorField(std::move(comps));
  }
  if (!s.hamiltonian.empty()) return hamiltonian_field(parse_polynomial(s.hamiltonian, n));
  if (!s.surfaces.empty()) {
    std::vector<Polynomial> f;
    for (const auto& p : s.surfaces) f.push_back(parse_polynomial(p, n));
    return jacobian_minor_field(f);
  }
  if (!s.network.empty()) {
    std::istringstream in(s.network);
    const auto net = parse_network(in);
    if (net.species_count() != n) throw bad_input("network species count differs from the spec dimension");
    return crn_field(net);
  }
  if (!s.matrix.empty()) {
    const auto A = matrix_from_rows(s.matrix, "linear matrix");
    if (A.rows() != n || A.cols() != n) throw bad_input("linear matrix must be n x n");
    return linear_field(A);
  }
  return std::nullopt;
}

inline void validate_spec(const SystemSpec& s) {
  if (s.dimension < 2) throw bad_input("spec: dimension must be at least 2");
  const bool has_field = !s.field.empty() || !s.hamiltonian.empty() || !s.surfaces.empty() || !s.network.empty() ||
                         !s.matrix.empty();
  switch (s.kind) {
    case SystemKind::Explicit: if (s.field.empty()) throw bad_input("explicit spec needs 'field'"); break;
    case SystemKind::Hamiltonian:
      if (s.hamiltonian.empty() || s.dimension != 2) throw bad_input("hamiltonian spec needs 'hamiltonian' in dimension 2");
      break;
    case SystemKind::Algebraic:
      if (static_cast<int>(s.surfaces.size()) != s.dimension - 1) throw bad_input("algebraic spec needs n-1 'surfaces'");
      break;
    case SystemKind::Crn: if (s.network.empty()) throw bad_input("crn spec needs 'network'"); break;
    case SystemKind::Linear: if (s.matrix.empty()) throw bad_input("linear spec needs 'matrix'"); break;
    case SystemKind::Trig: if (!s.trig) throw bad_input("trig spec needs 'trig'"); break;
  }
  if (s.kind != SystemKind::Trig) {
    if (!has_field) throw bad_input("spec has no vector field");
    if (s.starts.empty()) throw bad_input("spec needs at least one start point");
    for (const auto& p : s.starts)
      if (static_cast<int>(p.size()) != s.dimension) throw bad_input("start point dimension mismatch");
  } else if (trig_curve(*s.trig).dimension() != s.dimension) {
    throw bad_input("trig curve dimension differs from the spec dimension");
  }
  if (!(s.options.eps > 0) || !(s.options.tol >= 0) || s.options.grid_res < 2 || s.options.grid_res_3 < 2)
    throw bad_input("spec: invalid numerical options");
  if (s.options.delta && !(*s.options.delta > 0)) throw bad_input("spec: delta must be positive");
}

/// Concatenates trajectories from several starts into one sample.
inline CurveSample merge_samples(const std::vector<CurveSample>& parts) {
  if (parts.size() == 1) return parts[0];
  std::vector<Eigen::VectorXd> pts;
  std::vector<double> ts;
  double offset = 0.0;
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      pts.push_back(p.points[i]);
      ts.push_back(offset + p.params[i]);
    }
    offset = ts.back() + 1.0;
  }
  CurveSample s = make_sample(std::move(pts), std::move(ts), false);
  s.termination = parts.back().termination;
  return s;
}

inline CurveSample sample_system(const SystemSpec& s, const VectorField* phi) {
  if (s.kind == SystemKind::Trig) return sample_parametric(trig_curve(*s.trig), s.trig->samples);
  IntegrateOptions io;
  io.max_gap = s.max_gap;
  std::vector<CurveSample> parts;
  for (const auto& y0 : s.starts) {
    CurveSample c = integrate(*phi, to_eigen(y0), s.t_end, io);
    if (c.size() < 3) throw bad_input("insufficient sample: trajectory has fewer than three points");
    if (s.options.thin > 0) c = thin_sample(c, s.options.thin * max_consecutive_gap(c));
    parts.push_back(std::move(c));
  }
  return merge_samples(parts);
}

struct PipelineResult {
  RunReport report;
  CurveSample sample;  // hull input, in reduced coordinates when reduction ran
  std::optional<AffineReduction> reduction;
  PolytopeData hull;
  PatchReport patches;
  std::optional<PlateauResult> plateau;
  std::optional<VectorField> field;  // in the coordinates of `sample`
  std::optional<PartitionReport> partition;

  Eigen::VectorXd lift(const Eigen::VectorXd& u) const { return reduction ? reduction->lift(u) : u; }
  Eigen::VectorXd lift_direction(const Eigen::VectorXd& v) const { return reduction ? reduction->basis * v : v; }
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline PatchStats summarize_patches(const PatchReport& r, const PolytopeData& hull, const CurveSample& s) {
  PatchStats out;
  out.delta = r.delta;
  out.counts = r.counts;
  out.arcs = r.arcs.size();
  out.flagged = r.flagged_facets.size();
  out.unclassified = r.unclassified_components;
  out.suspicious = r.suspicious;
  for (const auto& p : r.patches) {
    PatchRecord pr{p.k, p.component_id, p.facets.size(), p.padded, {}};
    for (const auto& f : p.faces) {
      FaceRecord fr;
      fr.padding = f.padding;
      for (int v : f.vertices) {
        const int src = hull.source[static_cast<std::size_t>(v)];
        fr.points.push_back(src);
        fr.params.push_back(s.params[static_cast<std::size_t>(src)]);
      }
      pr.faces.push_back(std::move(fr));
    }
    out.patches.push_back(std::move(pr));
  }
  return out;
}

}  // namespace detail

enum class Stage { Sample, Hull, Patches, Partition };

/// Runs the stages up to and including `last`.
inline PipelineResult pipeline(const SystemSpec& spec, Stage last = Stage::Partition) {
  using clock = std::chrono::steady_clock;
  run_stage("spec", [&] {
    validate_spec(spec);
    return 0;
  });
  const auto& opt = spec.options;
  PipelineResult R;
  R.report.name = spec.name;
  std::optional<VectorField> phi = run_stage("spec", [&] { return build_field(spec); });
  std::vector<Polynomial> hooks = run_stage("spec", [&] {
    std::vector<Polynomial> h;
    for (const auto& f : spec.hooks) h.push_back(parse_polynomial(f, spec.dimension));
    for (const auto& f : spec.surfaces) h.push_back(parse_polynomial(f, spec.dimension));
    return h;
  });

  // Sample.
  auto t0 = clock::now();
  CurveSample raw = run_stage("sample", [&] { return sample_system(spec, phi ? &*phi : nullptr); });
  R.report.sample.points = raw.size();
  R.report.sample.dimension = raw.dimension;
  R.report.sample.termination = to_string(raw.termination);
  R.sample = run_stage("reduce", [&] {
    if (raw.size() < 2) throw bad_input("insufficient sample");
    if (!opt.reduce) return raw;
    R.reduction = affine_span_reduce(raw);
    return R.reduction->reduced;
  });
  if (R.reduction) {
    if (phi) phi = phi->reduced(R.reduction->basis, R.reduction->offset);
    for (auto& h : hooks) h = compose_affine(h, R.reduction->basis, R.reduction->offset);
  }
  R.field = phi;
  R.report.sample.thinned = R.sample.size();
  R.report.sample.reduced_dimension = R.sample.dimension;
  R.report.sample.max_gap = max_consecutive_gap(R.sample);
  R.report.sample.eps_estimate = R.sample.eps_estimate;
  R.report.timings.sample = detail::seconds_since(t0);
  if (last == Stage::Sample) return R;

  // Hull.
  t0 = clock::now();
  BensonStats bs;
  R.hull = run_stage("hull", [&] {
    if (static_cast<int>(R.sample.size()) <= R.sample.dimension) throw bad_input("insufficient sample");
    BensonOptions bo;
    bo.eps = opt.eps;
    return convex_hull_molp(R.sample.points, bo, &bs);
  });
  R.report.hull = {R.hull.dimension,          R.hull.vertices.size(),        R.hull.facets.size(), R.hull.edge_count(),
                   R.hull.incidence_nonzeros(), R.hull.adjacency_nonzeros(), bs.iterations,        bs.lp_solves};
  R.report.timings.hull = detail::seconds_since(t0);
  if (last == Stage::Hull) return R;

  // Patches.
  t0 = clock::now();
  R.patches = run_stage("patches", [&] {
    const int n = R.hull.dimension;
    if (n == 2) return detect_arcs_edges_2d(R.sample, R.hull, opt.delta.value_or(default_delta(R.sample)));
    if (opt.delta) return detect_patches(R.hull, *opt.delta);
    const auto links = facet_links(R.hull);
    const double lo = max_consecutive_gap(R.sample);
    R.plateau = plateau_scan([&](double d) { return detect_patches(R.hull, d, &links); }, lo,
                             std::max(opt.delta_max, 4 * lo), opt.plateau_steps);
    return R.plateau->report;
  });
  R.report.patches = detail::summarize_patches(R.patches, R.hull, R.sample);
  if (R.plateau) {
    R.report.patches.plateau_lo = R.plateau->lo;
    R.report.patches.plateau_hi = R.plateau->hi;
    R.report.patches.plateau_stable = R.plateau->stable;
  }
  R.report.timings.patches = detail::seconds_since(t0);
  if (last == Stage::Patches) return R;

  // Partition.
  t0 = clock::now();
  if (phi) {
    R.partition = run_stage("partition", [&] {
      PartitionOptions po;
      po.rel_tol = opt.tol;
      po.grid_res_2 = opt.grid_res;
      po.grid_res_3 = opt.grid_res_3;
      for (const auto& h : hooks) po.hooks.push_back({h});
      return partition_boundary(*phi, R.patches, R.hull, po);
    });
    auto& ps = R.report.partition;
    ps.evaluated = true;
    ps.forward_closed = R.partition->forward_closed;
    for (const auto& p : R.partition->patches)
      ps.patches.push_back({p.k, p.component_id, p.has_inward, p.has_outward, p.all_tangent, p.edges.size(),
                            p.faces.size(), static_cast<std::size_t>(p.skipped_faces)});
    for (const auto& w : R.partition->witnesses) {
      Eigen::VectorXd nrm = R.lift_direction(w.normal);
      nrm.normalize();
      ps.witnesses.push_back({to_std(R.lift(w.point)), to_std(nrm), w.value, w.patch, w.face});
    }
    for (const auto& p : outward_restart(*R.partition, *phi, opt.restarts)) ps.restart_points.push_back(to_std(R.lift(p)));
  }
  R.report.timings.partition = detail::seconds_since(t0);
  return R;
}

/// Writes every stage artifact into dir.
inline void write_artifacts(const PipelineResult& R, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw bad_input(std::string("cannot write ") + (dir / name).string());
    return f;
  };
  { auto f = open("sample.csv"); write_sample_csv(f, R.sample); }
  { auto f = open("hull.json"); f << hull_to_json(R.hull).dump(1) << "\n"; }
  if (R.hull.dimension <= 3) { auto f = open("hull.off"); write_off(f, R.hull); }
  {
    auto f = open("patches.json");
    json pj = R.report.patches;
    pj["schema"] = "convtraj.patches/1";
    f << pj.dump(1) << "\n";
  }
  if (R.report.partition.evaluated) {
    auto f = open("partition.json");
    json pj = R.report.partition;
    pj["schema"] = "convtraj.partition/1";
    f << pj.dump(1) << "\n";
  }
  { auto f = open("report.json"); f << json(R.report).dump(2) << "\n"; }
}

}  // namespace convtraj
