// convtraj: command line front end.
//
// Exit codes: 0 ok, 2 bad input, 3 numerical failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "convtraj/convtraj.hpp"

namespace ct = convtraj;

namespace {

struct Overrides {
  std::optional<double> eps, delta, tol;
  std::optional<int> grid_res;
  bool reduce = false;

  void add_to(CLI::App* app) {
    app->add_option("--eps", eps, "Benson tolerance");
    app->add_option("--delta", delta, "fixed proximity threshold (default: plateau scan)");
    app->add_option("--grid-res", grid_res, "barycentric grid resolution for 2-faces");
    app->add_option("--tol", tol, "relative sign tolerance");
    app->add_flag("--reduce", reduce, "work in the affine span of the sample");
  }
  void apply(ct::RunOptions& o) const {
    if (eps) o.eps = *eps;
    if (delta) o.delta = *delta;
    if (tol) o.tol = *tol;
    if (grid_res) o.grid_res = *grid_res;
    if (reduce) o.reduce = true;
  }
};

struct SpecSource {
  std::string file, example;
  void add_to(CLI::App* app) {
    auto* f = app->add_option("--spec", file, "system spec (JSON)")->check(CLI::ExistingFile);
    auto* e = app->add_option("--example", example, "named example system");
    f->excludes(e);
  }
  bool given() const { return !file.empty() || !example.empty(); }
  ct::SystemSpec load() const {
    if (!example.empty()) return ct::preset(example);
    if (file.empty()) throw ct::bad_input("need --spec or --example");
    std::ifstream in(file);
    std::stringstream ss;
    ss << in.rdbuf();
    return ct::parse_system_spec(ss.str());
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ct::bad_input("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& out_dir, const char* name) {
  if (out_dir.empty()) {
    std::cout << text;
    return;
  }
  std::filesystem::create_directories(out_dir);
  std::ofstream f(std::filesystem::path(out_dir) / name);
  if (!f) throw ct::bad_input("cannot write into " + out_dir);
  f << text;
  std::cerr << "wrote " << (std::filesystem::path(out_dir) / name).string() << "\n";
}

ct::CurveSample load_sample(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ct::bad_input("cannot read " + path);
  return ct::read_sample_csv(in);
}

ct::PatchReport patches_for(const ct::PolytopeData& hull, const ct::CurveSample* sample, const ct::RunOptions& o,
                            std::optional<ct::PlateauResult>& plateau) {
  if (hull.dimension == 2) {
    if (!sample) throw ct::bad_input("planar patch detection needs the sample (--input)");
    return ct::detect_arcs_edges_2d(*sample, hull, o.delta.value_or(ct::default_delta(*sample)));
  }
  if (o.delta) return ct::detect_patches(hull, *o.delta);
  if (!sample) throw ct::bad_input("the plateau scan needs the sample (--input) or a fixed --delta");
  const auto links = ct::facet_links(hull);
  const double lo = ct::max_consecutive_gap(*sample);
  plateau = ct::plateau_scan([&](double d) { return ct::detect_patches(hull, d, &links); }, lo,
                             std::max(o.delta_max, 4 * lo), o.plateau_steps);
  return plateau->report;
}

int exit_code(ct::ErrorKind k) { return k == ct::ErrorKind::BadInput ? 2 : 3; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convex hulls of trajectories: hull, patches, inward/outward partition"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out_dir;
  app.add_option("--out", out_dir, "directory for artifacts (default: stdout)");

  Overrides ov;
  SpecSource src;

  auto* sample_cmd = app.add_subcommand("sample", "sample a system's trajectory as CSV");
  src.add_to(sample_cmd);
  ov.add_to(sample_cmd);

  std::string input;
  auto* hull_cmd = app.add_subcommand("hull", "convex hull of a CSV sample or of a system's trajectory");
  hull_cmd->add_option("--input", input, "sample CSV")->check(CLI::ExistingFile);
  src.add_to(hull_cmd);
  ov.add_to(hull_cmd);

  std::string hull_file;
  auto* patch_cmd = app.add_subcommand("patches", "patch detection");
  patch_cmd->add_option("--hull", hull_file, "hull JSON")->check(CLI::ExistingFile);
  patch_cmd->add_option("--input", input, "sample CSV (required in the plane)")->check(CLI::ExistingFile);
  src.add_to(patch_cmd);
  ov.add_to(patch_cmd);

  auto* part_cmd = app.add_subcommand("partition", "inward/outward partition of the hull boundary");
  src.add_to(part_cmd);
  ov.add_to(part_cmd);

  auto* pipe_cmd = app.add_subcommand("pipeline", "run every stage and write all artifacts");
  src.add_to(pipe_cmd);
  ov.add_to(pipe_cmd);

  std::string example_name;
  bool list = false, spec_only = false;
  auto* ex_cmd = app.add_subcommand("example", "run a named example");
  ex_cmd->add_option("name", example_name, "example name");
  ex_cmd->add_flag("--list", list, "list examples");
  ex_cmd->add_flag("--spec-only", spec_only, "print the example's spec instead of running it");
  ov.add_to(ex_cmd);

  int degree = 3, trials = 10, samples = 0;
  unsigned threads = 0;
  std::uint64_t seed = 1;
  auto* census_cmd = app.add_subcommand("census", "patch counts of random trigonometric space curves");
  census_cmd->add_option("--degree", degree, "trigonometric degree d (curve degree 2d)");
  census_cmd->add_option("--trials", trials, "number of random curves");
  census_cmd->add_option("--seed", seed, "random seed");
  census_cmd->add_option("--samples", samples, "points per curve (default 150 d)");
  census_cmd->add_option("--threads", threads, "worker threads (default: all cores)");

  std::string network_file;
  auto* crn_cmd = app.add_subcommand("crn", "mass-action field of a reaction network");
  crn_cmd->add_option("network", network_file, "network text file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    auto spec_with_overrides = [&] {
      ct::SystemSpec s = src.load();
      ov.apply(s.options);
      return s;
    };

    if (*sample_cmd) {
      const auto R = ct::pipeline(spec_with_overrides(), ct::Stage::Sample);
      std::ostringstream os;
      ct::write_sample_csv(os, R.sample);
      emit(os.str(), out_dir, "sample.csv");
    } else if (*hull_cmd) {
      ct::CurveSample s;
      if (!input.empty()) s = load_sample(input);
      else s = ct::pipeline(spec_with_overrides(), ct::Stage::Sample).sample;
      ct::RunOptions o;
      ov.apply(o);
      ct::BensonOptions bo;
      bo.eps = o.eps;
      const auto H = ct::run_stage("hull", [&] { return ct::convex_hull_molp(s.points, bo); });
      emit(ct::hull_to_json(H).dump(1) + "\n", out_dir, "hull.json");
      if (!out_dir.empty() && H.dimension <= 3) {
        std::ostringstream os;
        ct::write_off(os, H);
        emit(os.str(), out_dir, "hull.off");
      }
      std::cerr << "vertices " << H.vertices.size() << " facets " << H.facets.size() << " edges " << H.edge_count() << "\n";
    } else if (*patch_cmd) {
      ct::RunOptions o;
      ov.apply(o);
      ct::json pj;
      if (!hull_file.empty()) {
        const auto H = ct::hull_from_json(ct::json::parse(read_file(hull_file)));
        std::optional<ct::CurveSample> s;
        if (!input.empty()) s = load_sample(input);
        std::optional<ct::PlateauResult> plateau;
        const auto P = ct::run_stage("patches", [&] { return patches_for(H, s ? &*s : nullptr, o, plateau); });
        if (!s) {
          // Without the sample, hull source indices stand in for parameters.
          ct::CurveSample idx;
          for (std::size_t i = 0; i <= static_cast<std::size_t>(*std::max_element(H.source.begin(), H.source.end())); ++i)
            idx.params.push_back(static_cast<double>(i));
          s = idx;
        }
        auto stats = ct::detail::summarize_patches(P, H, *s);
        if (plateau) {
          stats.plateau_lo = plateau->lo;
          stats.plateau_hi = plateau->hi;
          stats.plateau_stable = plateau->stable;
        }
        pj = stats;
      } else {
        pj = ct::pipeline(spec_with_overrides(), ct::Stage::Patches).report.patches;
      }
      pj["schema"] = "convtraj.patches/1";
      emit(pj.dump(1) + "\n", out_dir, "patches.json");
    } else if (*part_cmd) {
      const auto R = ct::pipeline(spec_with_overrides());
      if (!R.report.partition.evaluated) throw ct::bad_input("the system has no vector field to partition by");
      ct::json pj = R.report.partition;
      pj["schema"] = "convtraj.partition/1";
      emit(pj.dump(1) + "\n", out_dir, "partition.json");
    } else if (*pipe_cmd || *ex_cmd) {
      if (*ex_cmd && list) {
        for (const auto& n : ct::preset_names()) std::cout << n << "\t" << ct::preset_description(n) << "\n";
        return 0;
      }
      ct::SystemSpec s;
      if (*ex_cmd) {
        if (example_name.empty()) throw ct::bad_input("example: give a name or --list");
        s = ct::preset(example_name);
        ov.apply(s.options);
      } else {
        s = spec_with_overrides();
      }
      if (spec_only) {
        std::cout << ct::json(s).dump(2) << "\n";
        return 0;
      }
      const auto R = ct::pipeline(s);
      if (!out_dir.empty()) ct::write_artifacts(R, out_dir);
      std::cout << ct::json(R.report).dump(2) << "\n";
    } else if (*census_cmd) {
      ct::CensusOptions co;
      co.samples = samples;
      co.threads = threads;
      const auto T = ct::census(3, degree, trials, seed, co);
      emit(ct::json(T).dump(1) + "\n", out_dir, "census.json");
      std::cerr << "observed max #1 = " << T.max_edges << ", max #2 = " << T.max_triangles << " over " << trials
                << " trials\n";
    } else if (*crn_cmd) {
      std::istringstream in(read_file(network_file));
      const auto net = ct::parse_network(in);
      const auto phi = ct::crn_field(net);
      for (int i = 0; i < phi.dimension(); ++i) std::cout << "dx" << (i + 1) << "/dt = " << phi.components()[static_cast<std::size_t>(i)].to_string() << "\n";
      std::cout << "weakly reversible: " << (ct::weakly_reversible(net) ? "yes" : "no") << "\n";
    }
  } catch (const ct::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
