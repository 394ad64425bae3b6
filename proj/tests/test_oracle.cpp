#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sbatch/oracle.hpp"
#include "util.hpp"

using namespace sbatch;

namespace {

Instance pair_instance(int family_b) {
  Instance inst;
  inst.num_machines = 1;
  inst.num_families = 2;
  inst.jobs = {{1, 1, 0, 2, 0}, {2, 1, 0, 2, family_b}};
  inst.setups.inter = {{0, 2}, {1, 0}};
  inst.setups.initial = {1, 1};
  inst.bounds.min = {1, 1};
  inst.bounds.max = {2, 2};
  if (family_b == 0) {  // family 1 then owns no job
    inst.num_families = 1;
    inst.setups.inter = {{0}};
    inst.setups.initial = {1};
    inst.bounds.min = {1};
    inst.bounds.max = {2};
  }
  return inst;
}

long long count_sequencings(const Instance& inst, bool sizing = true) {
  long long n = 0;
  enumerate_all_feasible(inst, variation_ipf(), sizing, 8,
                         [&](const Schedule&, Time) { ++n; });
  return n;
}

}  // namespace

TEST_CASE("two jobs of different families on one machine: 2 sequencings") {
  CHECK(count_sequencings(pair_instance(1)) == 2);
}

TEST_CASE("two jobs of one family on one machine: 4 sequencings") {
  // 2 orders x (merged | split)
  CHECK(count_sequencings(pair_instance(0)) == 4);
}

TEST_CASE("one job on two machines: 2 sequencings") {
  Instance inst = pair_instance(0);
  inst.jobs.pop_back();
  inst.num_machines = 2;
  CHECK(count_sequencings(inst) == 2);
}

TEST_CASE("job cap") {
  Instance inst = testutil::table1();
  CHECK_THROWS_AS(enumerate_optimal(inst, variation_ipf(), true, 4),
                  CapExceeded);
}

TEST_CASE("worked example optima per variation") {
  const Instance inst = testutil::table1();
  CHECK(enumerate_optimal(inst, variation_ipf(), false)->objective == 55);
  CHECK(enumerate_optimal(inst, variation_ipf(), true)->objective == 61);

  VariationConfig forbid = variation_ipf();
  forbid.preemption = Preemption::Forbidden;
  CHECK(enumerate_optimal(inst, forbid, true)->objective == 71);

  VariationConfig complete = variation_ipf();
  complete.initiation = Initiation::Complete;
  CHECK(enumerate_optimal(inst, complete, true)->objective == 91);

  CHECK(enumerate_optimal(inst, variation_bc(), true)->objective == 99);
}

TEST_CASE("optimum schedules are feasible and deterministic") {
  Rng rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const Instance inst = testutil::tiny(rng, 4 + trial % 3, 2, 1 + trial % 2);
    for (const VariationConfig& var : testutil::four_variations()) {
      const auto a = enumerate_optimal(inst, var, true);
      const auto b = enumerate_optimal(inst, var, true);
      REQUIRE(a.has_value() == b.has_value());
      if (!a) continue;
      CHECK(a->objective == b->objective);
      CHECK(schedule_key(a->schedule) == schedule_key(b->schedule));
      CHECK(evaluate_twct(inst, a->schedule, var) == a->objective);
    }
  }
}

TEST_CASE("every enumerated schedule is feasible") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance inst = testutil::tiny(rng, 4, 2, 2);
    for (const VariationConfig& var : testutil::four_variations()) {
      enumerate_all_feasible(inst, var, true, 8,
                             [&](const Schedule& sched, Time objective) {
                               const EvalReport r =
                                   check_feasibility(inst, sched, var, true);
                               REQUIRE(r.feasible);
                               CHECK(*r.twct == objective);
                             });
    }
  }
}
