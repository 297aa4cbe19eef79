#pragma once

// Patch census of random trigonometric space curves.

#include <atomic>
#include <random>
#include <thread>

#include "convtraj/pipeline.hpp"

namespace convtraj {

struct CensusRow {
  int trial = 0;
  int edges = 0;      // #1
  int triangles = 0;  // #2
  bool stable = false;
  std::string error;  // empty when the trial ran
  int max_edges = 0, max_triangles = 0;  // running maxima up to this trial
  bool operator==(const CensusRow&) const = default;
};

struct CensusTable {
  std::string schema = "convtraj.census/1";
  int n = 3, d = 0, trials = 0, samples = 0;
  std::uint64_t seed = 0;
  std::vector<CensusRow> rows;
  int max_edges = 0, max_triangles = 0;
  bool operator==(const CensusTable&) const = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CensusRow, trial, edges, triangles, stable, error, max_edges, max_triangles)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CensusTable, schema, n, d, trials, samples, seed, rows, max_edges, max_triangles)

struct CensusOptions {
  int samples = 0;  // points per curve; 0 picks 150 per degree
  unsigned threads = 0;  // 0 uses the hardware concurrency
};

/// Random curve of one trial; entries uniform in [-0.5, 0.5]. Seeded by (seed, trial) alone.
inline SystemSpec census_spec(int n, int d, std::uint64_t seed, int trial, int samples) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  TrigPayload t;
  t.A.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(d)));
  t.B = t.A;
  for (auto* M : {&t.A, &t.B})
    for (auto& row : *M)
      for (auto& x : row) x = u(rng);
  for (int j = 0; j < n; ++j) t.C.push_back(u(rng));
  t.samples = samples;
  SystemSpec s;
  s.name = "census-" + std::to_string(trial);
  s.kind = SystemKind::Trig;
  s.dimension = n;
  s.trig = t;
  return s;
}

inline CensusTable census(int n, int d, int trials, std::uint64_t seed, const CensusOptions& opt = {}) {
  if (n != 3) throw bad_input("census: only n = 3 is supported");
  if (d < 3) throw bad_input("census: degree must be at least 3");
  if (trials < 0) throw bad_input("census: negative trial count");
  CensusTable table;
  table.n = n;
  table.d = d;
  table.trials = trials;
  table.seed = seed;
  table.samples = opt.samples > 0 ? opt.samples : 150 * d;
  table.rows.resize(static_cast<std::size_t>(trials));

  std::atomic<int> next{0};
  const auto work = [&] {
    for (int i = next++; i < trials; i = next++) {
      CensusRow& row = table.rows[static_cast<std::size_t>(i)];
      row.trial = i;
      try {
        const auto R = pipeline(census_spec(n, d, seed, i, table.samples));
        row.edges = R.patches.count(1);
        row.triangles = R.patches.count(2);
        row.stable = R.report.patches.plateau_stable;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned nthreads = std::min<unsigned>(opt.threads ? opt.threads : hw, static_cast<unsigned>(std::max(trials, 1)));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < nthreads; ++t) pool.emplace_back(work);
    work();
  }
  for (auto& row : table.rows) {
    table.max_edges = std::max(table.max_edges, row.edges);
    table.max_triangles = std::max(table.max_triangles, row.triangles);
    row.max_edges = table.max_edges;
    row.max_triangles = table.max_triangles;
  }
  return table;
}

}  // namespace convtraj
