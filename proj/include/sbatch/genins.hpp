#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbatch/instance.hpp"
#include "sbatch/rng.hpp"
#include "sbatch/solver.hpp"

namespace sbatch {

struct RestartLimit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CoreBudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GenSpec {
  int num_jobs = 15;
  int num_families = 2;
  int num_machines = 2;
  Time setup_scale = 20;
  std::uint64_t seed = 0;
};

// Setup times as shortest-path distances in a complete digraph on the
// family nodes plus a virtual source (arcs source->g carry the initial
// setups), arc weights uniform on [0,1], scaled and rounded. Rounding can
// break the triangle inequality, so the metric closure is re-applied on
// the integer matrix. Restarts with fresh weights until the inter matrix
// is asymmetric (|F| >= 2).
inline SetupMatrix gen_setup_matrix(int num_families, Time scale, Rng& rng) {
  if (num_families < 1)
    throw std::invalid_argument("num_families must be >= 1");
  const int F = num_families;

  for (int attempt = 0; attempt < 100; ++attempt) {
    // node 0 = virtual source, nodes 1..F = families
    std::vector<std::vector<double>> w(F + 1, std::vector<double>(F + 1, 0.0));
    for (int a = 0; a <= F; ++a)
      for (int b = 1; b <= F; ++b)
        if (a != b) w[a][b] = rng.unit();

    // all-pairs shortest paths (the source has no in-arcs)
    std::vector<std::vector<double>> d = w;
    for (int k = 1; k <= F; ++k)
      for (int a = 0; a <= F; ++a)
        for (int b = 1; b <= F; ++b)
          d[a][b] = std::min(d[a][b], d[a][k] + d[k][b]);

    SetupMatrix out;
    out.inter.assign(F, std::vector<Time>(F, 0));
    out.initial.assign(F, 0);
    for (int f = 0; f < F; ++f) {
      out.initial[f] = llround(d[0][f + 1] * static_cast<double>(scale));
      for (int g = 0; g < F; ++g)
        if (f != g)
          out.inter[f][g] = llround(d[f + 1][g + 1] * static_cast<double>(scale));
    }

    // metric closure on the rounded integers, iterated to a fixed point
    bool changed = true;
    while (changed) {
      changed = false;
      for (int k = 0; k < F; ++k)
        for (int f = 0; f < F; ++f)
          for (int g = 0; g < F; ++g)
            if (out.inter[f][k] + out.inter[k][g] < out.inter[f][g]) {
              out.inter[f][g] = out.inter[f][k] + out.inter[k][g];
              changed = true;
            }
    }
    for (int k = 0; k < F; ++k)
      for (int g = 0; g < F; ++g)
        out.initial[g] =
            std::min(out.initial[g], out.initial[k] + out.inter[k][g]);

    if (F < 2) return out;
    for (int f = 0; f < F; ++f)
      for (int g = f + 1; g < F; ++g)
        if (out.inter[f][g] != out.inter[g][f]) return out;
    // symmetric: draw fresh weights
  }
  throw RestartLimit("setup matrix stayed symmetric after 100 restarts");
}

inline Time cmax_lower_bound(const std::vector<Job>& jobs, int num_machines,
                             const SetupMatrix& setups) {
  const int F = static_cast<int>(setups.inter.size());
  Time sum_p = 0;
  for (const Job& j : jobs) sum_p += j.processing;
  Time max_inter = 0;
  for (const auto& row : setups.inter)
    for (Time t : row) max_inter = std::max(max_inter, t);
  Time max_initial = 0;
  for (Time t : setups.initial) max_initial = std::max(max_initial, t);
  const Time numerator = sum_p + (F - 1) * max_inter + max_initial;
  return (numerator + num_machines - 1) / num_machines;
}

// Instance without sizing requirements (l_f = 1, u_f = |J_f|); the
// minimum batch sizes are derived afterwards from a Core solution.
inline Instance gen_instance(const GenSpec& spec, Rng& rng) {
  if (spec.num_families > spec.num_jobs)
    throw std::invalid_argument("num_families must be <= num_jobs");
  if (spec.num_machines < 1)
    throw std::invalid_argument("num_machines must be >= 1");
  if (spec.setup_scale < 1)
    throw std::invalid_argument("setup_scale must be >= 1");

  Instance inst;
  inst.num_machines = spec.num_machines;
  inst.num_families = spec.num_families;
  inst.setups = gen_setup_matrix(spec.num_families, spec.setup_scale, rng);

  for (int j = 0; j < spec.num_jobs; ++j) {
    Job job;
    job.id = j + 1;
    job.processing = 1 + static_cast<Time>(rng.below(10));
    job.weight = 1 + static_cast<int>(rng.below(10));
    job.family = static_cast<int>(rng.below(spec.num_families));
    inst.jobs.push_back(job);
  }
  // rebalance: move a job out of the largest family into each empty one
  while (true) {
    std::vector<int> sizes = inst.family_sizes();
    const auto empty = std::find(sizes.begin(), sizes.end(), 0);
    if (empty == sizes.end()) break;
    const int biggest = static_cast<int>(
        std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    for (auto it = inst.jobs.rbegin(); it != inst.jobs.rend(); ++it)
      if (it->family == biggest) {
        it->family = static_cast<int>(empty - sizes.begin());
        break;
      }
  }

  const Time cmax = cmax_lower_bound(inst.jobs, inst.num_machines, inst.setups);
  for (Job& job : inst.jobs)
    job.release = 1 + static_cast<Time>(rng.below(static_cast<std::uint64_t>(cmax)));

  const std::vector<int> sizes = inst.family_sizes();
  inst.bounds.min.assign(spec.num_families, 1);
  inst.bounds.max = sizes;
  return inst;
}

// l-bar_f = shortest consecutive same-family run of family f across the
// machines of a Core (sizing-free) solution; the requirement is then
// drawn above it so that this very solution becomes sizing-infeasible
// whenever possible.
inline BatchSizeBounds derive_min_batch_sizes(
    const Instance& inst, Rng& rng,
    std::chrono::milliseconds core_budget = std::chrono::milliseconds(10000)) {
  SolverConfig cfg;
  cfg.sizing_enabled = false;
  cfg.time_limit = core_budget;
  const SolveResult core = solve(inst, cfg);
  if (!core.schedule)
    throw CoreBudgetExceeded("no Core schedule within " +
                             std::to_string(core_budget.count()) + " ms");

  const std::vector<int> sizes = inst.family_sizes();
  std::vector<int> run_min(inst.num_families, 0);
  for (const auto& machine : core.schedule->machines) {
    int run_family = -1;
    int run_len = 0;
    auto flush = [&]() {
      if (run_family >= 0 &&
          (run_min[run_family] == 0 || run_len < run_min[run_family]))
        run_min[run_family] = run_len;
    };
    for (const TimedBatch& batch : machine) {
      if (batch.family != run_family) {
        flush();
        run_family = batch.family;
        run_len = 0;
      }
      run_len += static_cast<int>(batch.jobs.size());
    }
    flush();
  }

  BatchSizeBounds out;
  out.max = sizes;
  out.min.resize(inst.num_families);
  for (int f = 0; f < inst.num_families; ++f) {
    const int lbar = run_min[f] == 0 ? sizes[f] : run_min[f];
    if (lbar + 1 > sizes[f]) {
      out.min[f] = sizes[f];
    } else {
      const int span = sizes[f] - lbar;  // choices lbar+1 .. |J_f|
      out.min[f] = lbar + 1 + static_cast<int>(rng.below(span));
    }
  }
  return out;
}

// ---- Experiment grid ----

struct SuiteClass {
  int jobs = 0;
  int families = 0;
  int machines = 0;
};

// The 13 job/family/machine classes of the experiment grid.
inline std::vector<SuiteClass> paper_grid() {
  return {
      {15, 2, 2},
      {25, 2, 2}, {25, 2, 3}, {25, 3, 2}, {25, 3, 3},
      {50, 3, 3}, {50, 3, 4}, {50, 5, 3}, {50, 5, 4},
      {100, 5, 4}, {100, 5, 5}, {100, 7, 4}, {100, 7, 5},
  };
}

struct SuiteEntry {
  std::string file;
  SuiteClass cls;
  Time scale = 0;
  int index = 0;
  std::uint64_t stream = 0;
  std::uint64_t hash = 0;  // FNV-1a of the file bytes
  Instance instance;
};

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::vector<SuiteEntry> gen_suite(
    const std::vector<SuiteClass>& grid, const std::vector<Time>& scales,
    int per_class, std::uint64_t seed,
    std::chrono::milliseconds core_budget = std::chrono::milliseconds(2000)) {
  std::vector<SuiteEntry> out;
  for (std::size_t ci = 0; ci < grid.size(); ++ci) {
    const SuiteClass& cls = grid[ci];
    for (std::size_t si = 0; si < scales.size(); ++si) {
      for (int k = 0; k < per_class; ++k) {
        SuiteEntry entry;
        entry.cls = cls;
        entry.scale = scales[si];
        entry.index = k;
        entry.stream = (static_cast<std::uint64_t>(ci) << 32) |
                       (static_cast<std::uint64_t>(si) << 16) |
                       static_cast<std::uint64_t>(k);
        Rng rng = Rng::stream(seed, entry.stream);
        GenSpec spec{cls.jobs, cls.families, cls.machines, scales[si], seed};
        entry.instance = gen_instance(spec, rng);
        entry.instance.bounds =
            derive_min_batch_sizes(entry.instance, rng, core_budget);
        entry.file = "j" + std::to_string(cls.jobs) + "_f" +
                     std::to_string(cls.families) + "_m" +
                     std::to_string(cls.machines) + "_s" +
                     std::to_string(scales[si]) + "_i" + std::to_string(k) +
                     ".json";
        entry.hash = fnv1a(instance_to_json(entry.instance).dump(2) + "\n");
        out.push_back(std::move(entry));
      }
    }
  }
  return out;
}

inline nlohmann::json suite_manifest(const std::vector<SuiteEntry>& suite,
                                     std::uint64_t seed) {
  nlohmann::json entries = nlohmann::json::array();
  for (const SuiteEntry& e : suite)
    entries.push_back({{"file", e.file},
                       {"jobs", e.cls.jobs},
                       {"families", e.cls.families},
                       {"machines", e.cls.machines},
                       {"scale", e.scale},
                       {"index", e.index},
                       {"stream", e.stream},
                       {"fnv1a", e.hash}});
  return {{"seed", seed}, {"instances", entries}};
}

}  // namespace sbatch
