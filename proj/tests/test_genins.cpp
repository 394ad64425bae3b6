#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sbatch/genins.hpp"
#include "sbatch/oracle.hpp"
#include "util.hpp"

using namespace sbatch;

TEST_CASE("setup matrices are triangular, bounded and asymmetric") {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const int F = 2 + static_cast<int>(rng.below(5));
    const Time S = 10 + static_cast<Time>(rng.below(91));
    const SetupMatrix m = gen_setup_matrix(F, S, rng);

    bool asymmetric = false;
    for (int f = 0; f < F; ++f) {
      CHECK(m.inter[f][f] == 0);
      CHECK(m.initial[f] >= 0);
      CHECK(m.initial[f] <= S);
      for (int g = 0; g < F; ++g) {
        CHECK(m.inter[f][g] >= 0);
        CHECK(m.inter[f][g] <= S);
        if (m.inter[f][g] != m.inter[g][f]) asymmetric = true;
        for (int h = 0; h < F; ++h)
          CHECK(m.inter[f][h] <= m.inter[f][g] + m.inter[g][h]);
      }
    }
    CHECK(asymmetric);
  }
}

TEST_CASE("single family setup matrix") {
  Rng rng(2);
  const SetupMatrix m = gen_setup_matrix(1, 20, rng);
  CHECK(m.inter == std::vector<std::vector<Time>>{{0}});
  CHECK(m.initial.size() == 1);
  CHECK(m.initial[0] >= 0);
  CHECK(m.initial[0] <= 20);
}

TEST_CASE("cmax lower bound") {
  const Instance inst = testutil::table1();
  CHECK(cmax_lower_bound(inst.jobs, 1, inst.setups) == 14);
  CHECK(cmax_lower_bound(inst.jobs, 2, inst.setups) == 7);

  SetupMatrix single;
  single.inter = {{0}};
  single.initial = {2};
  std::vector<Job> jobs = {{1, 1, 0, 3, 0}, {2, 1, 0, 4, 0}};
  CHECK(cmax_lower_bound(jobs, 1, single) == 9);
}

TEST_CASE("generated instances are valid, uniform and reproducible") {
  GenSpec spec{15, 2, 2, 20, 1};
  Rng a = Rng::stream(1, 0);
  Rng b = Rng::stream(1, 0);
  const Instance first = gen_instance(spec, a);
  const Instance second = gen_instance(spec, b);
  CHECK(instance_to_json(first).dump() == instance_to_json(second).dump());
  CHECK(validate_instance(first).empty());

  Rng big(5);
  double sum_p = 0, sum_w = 0;
  long long n = 0;
  const Time cmax = cmax_lower_bound(first.jobs, 2, first.setups);
  (void)cmax;
  for (int trial = 0; trial < 60; ++trial) {
    const Instance inst = gen_instance(spec, big);
    const Time horizon =
        cmax_lower_bound(inst.jobs, inst.num_machines, inst.setups);
    for (const Job& j : inst.jobs) {
      CHECK(j.weight >= 1);
      CHECK(j.weight <= 10);
      CHECK(j.processing >= 1);
      CHECK(j.processing <= 10);
      CHECK(j.release >= 1);
      CHECK(j.release <= horizon);
      sum_p += static_cast<double>(j.processing);
      sum_w += j.weight;
      ++n;
    }
    for (int size : inst.family_sizes()) CHECK(size > 0);
  }
  // mean of U{1..10} is 5.5, sd ~2.87; 3 sigma of the sample mean
  const double nd = static_cast<double>(n);
  const double tol = 3.0 * 2.872 / std::sqrt(nd);
  CHECK(std::abs(sum_p / nd - 5.5) < tol);
  CHECK(std::abs(sum_w / nd - 5.5) < tol);
}

TEST_CASE("derived minimum batch sizes on the worked example") {
  Instance inst = testutil::table1();
  inst.bounds.min = {1, 1};
  inst.bounds.max = {3, 2};
  // Core runs: family 0 -> {2, 1}, family 1 -> {2}; lbar = (1, 2)
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const BatchSizeBounds bounds = derive_min_batch_sizes(inst, rng);
    CHECK(bounds.max == std::vector<int>{3, 2});
    CHECK((bounds.min[0] == 2 || bounds.min[0] == 3));
    CHECK(bounds.min[1] == 2);  // clamped: lbar + 1 > |J_1|
  }
}

TEST_CASE("derived bounds admit a feasible schedule and cut the Core one") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    GenSpec spec{6 + trial % 3, 2, 1 + trial % 2, 20,
                 static_cast<std::uint64_t>(trial)};
    Instance inst = gen_instance(spec, rng);

    SolverConfig core_cfg;
    core_cfg.sizing_enabled = false;
    const SolveResult core = solve(inst, core_cfg);
    REQUIRE(core.schedule.has_value());

    Rng derive_rng(trial);
    const BatchSizeBounds bounds =
        derive_min_batch_sizes(inst, derive_rng,
                               std::chrono::milliseconds(10000));
    const std::vector<int> sizes = inst.family_sizes();
    bool any_range = false;
    for (int f = 0; f < inst.num_families; ++f) {
      CHECK(bounds.min[f] <= sizes[f]);
      CHECK(bounds.max[f] == sizes[f]);
      if (bounds.min[f] > 1) any_range = any_range || true;
    }

    inst.bounds = bounds;
    CHECK(validate_instance(inst).empty());
    // l_f <= |J_f| = u_f always leaves the one-batch-per-family schedule
    SolverConfig cfg;
    const SolveResult sized = solve(inst, cfg);
    CHECK(sized.status == SolveStatus::Optimal);

    // the deriving Core schedule must break some derived bound whenever
    // any drawing range was nonempty
    Rng replay(trial);
    bool nonempty_range = false;
    {
      std::vector<int> run_min(inst.num_families, 0);
      for (const auto& machine : core.schedule->machines) {
        int fam = -1, len = 0;
        auto flush = [&]() {
          if (fam >= 0 && (run_min[fam] == 0 || len < run_min[fam]))
            run_min[fam] = len;
        };
        for (const TimedBatch& b : machine) {
          if (b.family != fam) {
            flush();
            fam = b.family;
            len = 0;
          }
          len += static_cast<int>(b.jobs.size());
        }
        flush();
      }
      for (int f = 0; f < inst.num_families; ++f)
        if (run_min[f] + 1 <= sizes[f]) nonempty_range = true;
    }
    if (nonempty_range)
      CHECK(!check_feasibility(inst, *core.schedule, variation_ipf(), true)
                 .feasible);
  }
}

TEST_CASE("suite generation matches the grid and reproduces") {
  const std::vector<SuiteClass> grid = {{5, 2, 1}, {6, 2, 2}};
  const auto suite = gen_suite(grid, {20, 50}, 2, 7);
  CHECK(suite.size() == 2 * 2 * 2);
  CHECK(suite[0].file == "j5_f2_m1_s20_i0.json");
  for (const SuiteEntry& e : suite)
    CHECK(validate_instance(e.instance).empty());

  const auto again = gen_suite(grid, {20, 50}, 2, 7);
  CHECK(suite_manifest(suite, 7).dump() == suite_manifest(again, 7).dump());

  const auto other_seed = gen_suite(grid, {20, 50}, 2, 8);
  CHECK(suite_manifest(suite, 7).at("instances") !=
        suite_manifest(other_seed, 8).at("instances"));

  CHECK(paper_grid().size() == 13);
  // full grid with per_class = 30 and all three scales = 1170 files
  long long total = 0;
  for (std::size_t i = 0; i < paper_grid().size(); ++i) total += 3 * 30;
  CHECK(total == 1170);
}

TEST_CASE("symmetric draws are retried") {
  // at scale 1 every entry rounds to 0 or 1, so symmetric first draws
  // are frequent and the restart loop must engage to deliver asymmetry
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const SetupMatrix m = gen_setup_matrix(2, 1, rng);
    CHECK(m.inter[0][1] != m.inter[1][0]);
  }
}
