#pragma once

// Named example systems. Each preset pins an FNV-1a checksum of its
// coefficient payload so a transcription slip fails loudly.

#include <cstdint>
#include <map>
#include <numbers>

#include "convtraj/pipeline.hpp"

namespace convtraj {

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Checksum over everything that defines the system, options excluded.
inline std::uint64_t payload_checksum(const SystemSpec& s) {
  json j = s;
  j.erase("options");
  j.erase("name");
  return fnv1a(j.dump());
}

namespace detail {

inline SystemSpec preset_trott() {
  SystemSpec s;
  s.kind = SystemKind::Hamiltonian;
  s.dimension = 2;
  s.hamiltonian = "144x^4 + 144y^4 - 225x^2 - 225y^2 + 350x^2y^2 + 81";
  s.starts = {{0.0, -1.0}};
  s.t_end = 100.0;
  s.max_gap = 0.002;
  s.options.thin = 0.0;
  return s;
}

// (cos t, sin 2t, cos 3t): the intersection of a quadric and a cubic surface.
inline SystemSpec preset_yellow_green() {
  SystemSpec s;
  s.kind = SystemKind::Trig;
  s.dimension = 3;
  s.trig = TrigPayload{{{1, 0, 0}, {0, 0, 0}, {0, 0, 1}}, {{0, 0, 0}, {0, 1, 0}, {0, 0, 0}}, {0, 0, 0}, 100};
  s.surfaces = {"x1^2 - x2^2 - x1*x3", "x3 - 4*x1^3 + 3*x1"};
  return s;
}

// (cos 3t, sin 3t, cos 4t, sin 4t), an orbit of a skew-symmetric linear system.
inline SystemSpec preset_smilansky() {
  SystemSpec s;
  s.kind = SystemKind::Trig;
  s.dimension = 4;
  TrigPayload t;
  t.A.assign(4, std::vector<double>(4, 0.0));
  t.B = t.A;
  t.A[0][2] = 1;
  t.B[1][2] = 1;
  t.A[2][3] = 1;
  t.B[3][3] = 1;
  t.C = {0, 0, 0, 0};
  t.samples = 120;
  s.trig = t;
  const double w = 2 * std::numbers::pi;
  s.matrix = {{0, -3 * w, 0, 0}, {3 * w, 0, 0, 0}, {0, 0, 0, -4 * w}, {0, 0, 4 * w, 0}};
  return s;
}

inline SystemSpec preset_degree14() {
  SystemSpec s;
  s.kind = SystemKind::Trig;
  s.dimension = 3;
  TrigPayload t;
  t.A = {{0.28561, -0.024204, -0.07664, 0.43593, 0.15244, -0.24464, 0.41538},
         {-0.37439, -0.30106, 0.32118, 0.38410, 0.29990, -0.14990, -0.45481},
         {-0.17997, -0.16046, -0.23522, 0.47912, -0.08084, 0.19628, 0.46895}};
  t.B = {{-0.39109, 0.06742, -0.12451, 0.44073, -0.20822, -0.03646, -0.01034},
         {0.48646, 0.38580, -0.13216, 0.36184, 0.30633, -0.14131, 0.48650},
         {-0.15326, 0.32591, 0.02569, 0.23351, -0.34972, 0.04772, 0.42441}};
  t.C = {0.39768, 0.42346, 0.23797};
  t.samples = 1000;
  s.trig = t;
  return s;
}

inline SystemSpec preset_van_de_vusse() {
  SystemSpec s;
  s.kind = SystemKind::Crn;
  s.dimension = 4;
  s.network =
      "species 4\ncomplex 1: 1 0 0 0\ncomplex 2: 0 1 0 0\ncomplex 3: 0 0 1 0\ncomplex 4: 2 0 0 0\n"
      "complex 5: 0 0 0 1\nedge 1 2 1\nedge 2 3 1\nedge 4 5 10\n";
  s.starts = {{1, 0, 0, 0}};
  s.t_end = 200.0;
  s.max_gap = 0.01;
  s.options.reduce = true;
  return s;
}

inline SystemSpec preset_weakly_reversible() {
  SystemSpec s;
  s.kind = SystemKind::Crn;
  s.dimension = 3;
  s.network =
      "species 3\ncomplex 1: 2 1 0\ncomplex 2: 1 0 1\ncomplex 3: 0 2 1\ncomplex 4: 1 1 0\n"
      "edge 1 2 2\nedge 2 1 2\nedge 1 3 4\nedge 3 1 4\nedge 3 4 2\nedge 4 3 4\n";
  s.starts = {{4, 4, 2}};
  s.t_end = 200.0;
  s.max_gap = 0.01;
  s.options.reduce = true;
  return s;
}

// Rotations at speeds 1 and 2: the orbit's hull is invariant, hence forward closed.
inline SystemSpec preset_skew_linear() {
  SystemSpec s;
  s.kind = SystemKind::Linear;
  s.dimension = 4;
  s.matrix = {{0, -1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, -2}, {0, 0, 2, 0}};
  s.starts = {{1, 0, 1, 0}};
  s.t_end = 20.0;
  s.max_gap = 0.3;
  s.options.thin = 2.0;  // the hull is neighbourly, so facets grow quadratically with the sample
  return s;
}

struct PresetEntry {
  SystemSpec (*make)();
  std::uint64_t checksum;
  const char* description;
};

inline const std::map<std::string, PresetEntry>& preset_table() {
  static const std::map<std::string, PresetEntry> table{
      {"trott", {preset_trott, 0xf600bb7e18daa304ULL, "Trott quartic as a Hamiltonian orbit"}},
      {"yellow-green", {preset_yellow_green, 0x182240e065983a9bULL, "(cos t, sin 2t, cos 3t) with its Jacobian-minor field"}},
      {"smilansky-3-4", {preset_smilansky, 0xd1d48c0728323e5cULL, "generalized moment curve (cos 3t, sin 3t, cos 4t, sin 4t)"}},
      {"degree14", {preset_degree14, 0x653049a4a03793abULL, "degree-14 trigonometric space curve"}},
      {"van-de-vusse", {preset_van_de_vusse, 0x4cbcf1eaa21c4015ULL, "Van de Vusse mass-action network"}},
      {"weakly-reversible", {preset_weakly_reversible, 0x4e6620f77794d360ULL, "weakly reversible network with a non-closed hull"}},
      {"skew-linear", {preset_skew_linear, 0xdece2e77875c1357ULL, "skew-symmetric 4x4 linear system"}},
  };
  return table;
}

}  // namespace detail

inline std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : detail::preset_table()) out.push_back(k);
  return out;
}

inline std::string preset_description(const std::string& name) {
  const auto& t = detail::preset_table();
  const auto it = t.find(name);
  if (it == t.end()) throw bad_input("unknown example '" + name + "'");
  return it->second.description;
}

inline SystemSpec preset(const std::string& name) {
  const auto& t = detail::preset_table();
  const auto it = t.find(name);
  if (it == t.end()) throw bad_input("unknown example '" + name + "'");
  SystemSpec s = it->second.make();
  s.name = name;
  if (payload_checksum(s) != it->second.checksum) throw numerical("preset '" + name + "' failed its checksum");
  return s;
}

inline PipelineResult run_example(const std::string& name) { return pipeline(preset(name)); }

}  // namespace convtraj
