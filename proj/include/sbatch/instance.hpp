#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace sbatch {

using Time = long long;

struct Job {
  int id = 0;
  int weight = 1;       // w_j >= 1
  Time release = 0;     // r_j >= 0
  Time processing = 1;  // p_j >= 1
  int family = 0;       // f_j in [0, num_families)
};

// Inter-family setup times tau_fg plus the initial setups tau_0g applied
// before the first batch on a machine. The inter matrix must have a zero
// diagonal and satisfy the triangle inequality.
struct SetupMatrix {
  std::vector<std::vector<Time>> inter;
  std::vector<Time> initial;
};

struct BatchSizeBounds {
  std::vector<int> min;  // l_f
  std::vector<int> max;  // u_f
};

enum class Availability { Item, Batch };
enum class Preemption { Allowed, Forbidden };
enum class Initiation { Flexible, Complete };

// The three orthogonal axes of the problem variation. IPF is
// (Item, Allowed, Flexible); B.C is (Batch, *, Complete).
struct VariationConfig {
  Availability availability = Availability::Item;
  Preemption preemption = Preemption::Allowed;
  Initiation initiation = Initiation::Flexible;
};

inline VariationConfig variation_ipf() { return {}; }

inline VariationConfig variation_bc() {
  return {Availability::Batch, Preemption::Allowed, Initiation::Complete};
}

struct Instance {
  std::vector<Job> jobs;
  int num_machines = 1;
  int num_families = 1;
  SetupMatrix setups;
  BatchSizeBounds bounds;

  // Index of the job with the given external id, or -1.
  int job_index(int id) const {
    for (std::size_t i = 0; i < jobs.size(); ++i)
      if (jobs[i].id == id) return static_cast<int>(i);
    return -1;
  }

  std::vector<int> family_sizes() const {
    std::vector<int> sizes(num_families, 0);
    for (const Job& j : jobs)
      if (j.family >= 0 && j.family < num_families) ++sizes[j.family];
    return sizes;
  }

  Time setup(int from_family, int to_family) const {
    if (from_family < 0) return setups.initial[to_family];
    return setups.inter[from_family][to_family];
  }

  Time total_processing() const {
    Time sum = 0;
    for (const Job& j : jobs) sum += j.processing;
    return sum;
  }
};

inline std::vector<std::string> validate_instance(const Instance& inst) {
  std::vector<std::string> out;
  auto add = [&](std::string msg) { out.push_back(std::move(msg)); };

  if (inst.num_machines < 1) add("num_machines must be >= 1");
  if (inst.num_families < 1) add("num_families must be >= 1");

  std::map<int, int> seen;
  for (const Job& j : inst.jobs) {
    if (j.id < 0) add("job id " + std::to_string(j.id) + " is negative");
    if (++seen[j.id] == 2) add("duplicate job id " + std::to_string(j.id));
    if (j.weight < 1)
      add("job " + std::to_string(j.id) + ": weight must be >= 1");
    if (j.processing < 1)
      add("job " + std::to_string(j.id) + ": processing must be >= 1");
    if (j.release < 0)
      add("job " + std::to_string(j.id) + ": release must be >= 0");
    if (j.family < 0 || j.family >= inst.num_families)
      add("job " + std::to_string(j.id) + ": family out of range");
  }

  const int F = inst.num_families;
  if (static_cast<int>(inst.setups.inter.size()) != F) {
    add("setup_inter must be " + std::to_string(F) + "x" + std::to_string(F));
  } else {
    for (int f = 0; f < F; ++f) {
      if (static_cast<int>(inst.setups.inter[f].size()) != F) {
        add("setup_inter row " + std::to_string(f) + " has wrong length");
        return out;
      }
    }
    for (int f = 0; f < F; ++f) {
      if (inst.setups.inter[f][f] != 0)
        add("setup_inter[" + std::to_string(f) + "][" + std::to_string(f) +
            "] must be 0");
      for (int g = 0; g < F; ++g)
        if (inst.setups.inter[f][g] < 0)
          add("setup_inter[" + std::to_string(f) + "][" + std::to_string(g) +
              "] is negative");
    }
    // Full triple loop: tau_ff' <= tau_fg + tau_gf'.
    for (int f = 0; f < F; ++f)
      for (int g = 0; g < F; ++g)
        for (int h = 0; h < F; ++h)
          if (inst.setups.inter[f][h] >
              inst.setups.inter[f][g] + inst.setups.inter[g][h])
            add("triangle inequality violated for (" + std::to_string(f) +
                "," + std::to_string(g) + "," + std::to_string(h) + ")");
  }
  if (static_cast<int>(inst.setups.initial.size()) != F) {
    add("setup_initial must have length " + std::to_string(F));
  } else {
    for (int f = 0; f < F; ++f)
      if (inst.setups.initial[f] < 0)
        add("setup_initial[" + std::to_string(f) + "] is negative");
  }

  const std::vector<int> sizes = inst.family_sizes();
  for (int f = 0; f < F; ++f)
    if (sizes[f] == 0) add("family " + std::to_string(f) + " owns no job");

  if (static_cast<int>(inst.bounds.min.size()) != F ||
      static_cast<int>(inst.bounds.max.size()) != F) {
    add("batch size bounds must have length " + std::to_string(F));
  } else {
    for (int f = 0; f < F; ++f) {
      if (inst.bounds.min[f] < 1)
        add("min_batch[" + std::to_string(f) + "] must be >= 1");
      if (inst.bounds.min[f] > inst.bounds.max[f])
        add("min_batch[" + std::to_string(f) + "] exceeds max_batch[" +
            std::to_string(f) + "]");
      if (inst.bounds.min[f] > sizes[f])
        add("min_batch[" + std::to_string(f) + "] exceeds family size " +
            std::to_string(sizes[f]));
    }
  }
  return out;
}

struct BatchCounts {
  std::vector<long long> per_family;  // N_f
  long long total = 0;                // N
};

// N_f = floor(|J_f| / l_f) when sizing is enabled; |J_f| otherwise
// (Core-only mode, where batches are unconstrained in size).
inline BatchCounts max_batch_counts(const Instance& inst, bool sizing_enabled) {
  BatchCounts out;
  const std::vector<int> sizes = inst.family_sizes();
  out.per_family.resize(inst.num_families);
  for (int f = 0; f < inst.num_families; ++f) {
    out.per_family[f] =
        sizing_enabled ? sizes[f] / inst.bounds.min[f] : sizes[f];
    out.total += out.per_family[f];
  }
  return out;
}

// ---- JSON (canonical instance file format) ----

inline nlohmann::json instance_to_json(const Instance& inst) {
  nlohmann::json j;
  j["num_machines"] = inst.num_machines;
  j["num_families"] = inst.num_families;
  j["jobs"] = nlohmann::json::array();
  for (const Job& job : inst.jobs)
    j["jobs"].push_back({{"id", job.id},
                         {"weight", job.weight},
                         {"release", job.release},
                         {"processing", job.processing},
                         {"family", job.family}});
  std::vector<Time> flat;
  for (const auto& row : inst.setups.inter)
    flat.insert(flat.end(), row.begin(), row.end());
  j["setup_inter"] = flat;  // row-major |F|x|F|
  j["setup_initial"] = inst.setups.initial;
  j["min_batch"] = inst.bounds.min;
  j["max_batch"] = inst.bounds.max;
  return j;
}

inline Instance instance_from_json(const nlohmann::json& j) {
  Instance inst;
  inst.num_machines = j.at("num_machines").get<int>();
  inst.num_families = j.at("num_families").get<int>();
  for (const auto& job : j.at("jobs"))
    inst.jobs.push_back({job.at("id").get<int>(), job.at("weight").get<int>(),
                         job.at("release").get<Time>(),
                         job.at("processing").get<Time>(),
                         job.at("family").get<int>()});
  const int F = inst.num_families;
  std::vector<Time> flat = j.at("setup_inter").get<std::vector<Time>>();
  if (static_cast<int>(flat.size()) != F * F)
    throw std::invalid_argument("setup_inter must hold |F|*|F| entries");
  inst.setups.inter.assign(F, std::vector<Time>(F));
  for (int f = 0; f < F; ++f)
    for (int g = 0; g < F; ++g) inst.setups.inter[f][g] = flat[f * F + g];
  inst.setups.initial = j.at("setup_initial").get<std::vector<Time>>();
  inst.bounds.min = j.at("min_batch").get<std::vector<int>>();
  inst.bounds.max = j.at("max_batch").get<std::vector<int>>();
  return inst;
}

}  // namespace sbatch
