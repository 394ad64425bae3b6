#pragma once

#include <vector>

#include "sbatch/genins.hpp"
#include "sbatch/instance.hpp"
#include "sbatch/rng.hpp"

namespace testutil {

// Five jobs, two families, one machine; the worked example used across
// the suite. l = (3, 2) binds once sizing is enabled.
inline sbatch::Instance table1() {
  sbatch::Instance inst;
  inst.num_machines = 1;
  inst.num_families = 2;
  inst.jobs = {
      {1, 1, 1, 2, 0},
      {2, 1, 5, 2, 0},
      {3, 1, 6, 2, 1},
      {4, 1, 12, 2, 1},
      {5, 1, 11, 2, 0},
  };
  inst.setups.inter = {{0, 3}, {3, 0}};
  inst.setups.initial = {1, 1};
  inst.bounds.min = {3, 2};
  inst.bounds.max = {3, 2};
  return inst;
}

// Small random instance for oracle comparisons. Sizing feasibility is
// not guaranteed; infeasible draws must agree between solver and oracle.
inline sbatch::Instance tiny(sbatch::Rng& rng, int jobs, int families,
                             int machines) {
  sbatch::Instance inst;
  inst.num_machines = machines;
  inst.num_families = families;
  inst.setups = sbatch::gen_setup_matrix(families, 5, rng);
  for (int j = 0; j < jobs; ++j) {
    sbatch::Job job;
    job.id = j + 1;
    job.weight = 1 + static_cast<int>(rng.below(5));
    job.processing = 1 + static_cast<sbatch::Time>(rng.below(5));
    job.release = static_cast<sbatch::Time>(rng.below(11));
    job.family = j < families ? j : static_cast<int>(rng.below(families));
    inst.jobs.push_back(job);
  }
  const std::vector<int> sizes = inst.family_sizes();
  for (int f = 0; f < families; ++f) {
    const int l = 1 + static_cast<int>(rng.below(sizes[f]));
    const int u = l + static_cast<int>(rng.below(sizes[f] - l + 1));
    inst.bounds.min.push_back(l);
    inst.bounds.max.push_back(u);
  }
  return inst;
}

inline std::vector<sbatch::VariationConfig> four_variations() {
  using namespace sbatch;
  return {
      variation_ipf(),
      {Availability::Batch, Preemption::Allowed, Initiation::Complete},
      {Availability::Item, Preemption::Forbidden, Initiation::Flexible},
      {Availability::Item, Preemption::Allowed, Initiation::Complete},
  };
}

}  // namespace testutil
