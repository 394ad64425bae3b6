#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sbatch/instance.hpp"
#include "sbatch/schedule.hpp"

namespace sbatch {

struct CapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OracleResult {
  Time objective = 0;
  Schedule schedule;
};

namespace oracle_detail {

// Exhaustive enumeration of sequencings: machine assignment, per-machine
// job order, and batch breaks. Between consecutive same-family jobs the
// break is a free choice (adjacent same-family batches are distinct for
// sizing); a family change forces one.
class Enumerator {
 public:
  Enumerator(const Instance& inst, const VariationConfig& var,
             bool sizing_enabled,
             std::function<void(const Schedule&, Time)> emit)
      : inst_(inst), var_(var), sizing_(sizing_enabled), emit_(std::move(emit)) {
    assignment_.resize(inst.jobs.size(), 0);
  }

  void run() { assign_machines(0); }

 private:
  void assign_machines(std::size_t j) {
    if (j == inst_.jobs.size()) {
      seq_.assign(inst_.num_machines, {});
      order_machine(0);
      return;
    }
    for (int m = 0; m < inst_.num_machines; ++m) {
      assignment_[j] = m;
      assign_machines(j + 1);
    }
  }

  void order_machine(int m) {
    if (m == inst_.num_machines) {
      finish();
      return;
    }
    std::vector<int> pool;
    for (std::size_t j = 0; j < assignment_.size(); ++j)
      if (assignment_[j] == m) pool.push_back(static_cast<int>(j));
    std::vector<bool> used(pool.size(), false);
    place_next(m, 0, pool, used);
  }

  void place_next(int m, std::size_t depth, const std::vector<int>& pool,
                  std::vector<bool>& used) {
    if (depth == pool.size()) {
      order_machine(m + 1);
      return;
    }
    for (std::size_t k = 0; k < pool.size(); ++k) {
      if (used[k]) continue;
      used[k] = true;
      const Job& job = inst_.jobs[pool[k]];
      auto& batches = seq_[m];
      const bool can_merge =
          depth > 0 && batches.back().family == job.family;
      if (can_merge) {
        batches.back().job_ids.push_back(job.id);
        place_next(m, depth + 1, pool, used);
        batches.back().job_ids.pop_back();
      }
      batches.push_back({job.family, {job.id}});
      place_next(m, depth + 1, pool, used);
      batches.pop_back();
      used[k] = false;
    }
  }

  void finish() {
    if (sizing_) {
      for (const auto& machine : seq_)
        for (const SequencedBatch& batch : machine) {
          const int size = static_cast<int>(batch.job_ids.size());
          if (size < inst_.bounds.min[batch.family] ||
              size > inst_.bounds.max[batch.family])
            return;
        }
    }
    const Schedule sched = left_shift_timing(inst_, seq_, var_);
    emit_(sched, detail::twct_unchecked(inst_, sched, var_.availability));
  }

  const Instance& inst_;
  VariationConfig var_;
  bool sizing_;
  std::function<void(const Schedule&, Time)> emit_;
  std::vector<int> assignment_;
  Sequencing seq_;
};

}  // namespace oracle_detail

inline void enumerate_all_feasible(
    const Instance& inst, const VariationConfig& var, bool sizing_enabled,
    int job_cap, const std::function<void(const Schedule&, Time)>& emit) {
  if (static_cast<int>(inst.jobs.size()) > job_cap)
    throw CapExceeded("oracle cap of " + std::to_string(job_cap) +
                      " jobs exceeded (" + std::to_string(inst.jobs.size()) +
                      ")");
  oracle_detail::Enumerator(inst, var, sizing_enabled, emit).run();
}

// Exact global optimum by exhaustive enumeration; ties broken by the
// lexicographically smallest canonical schedule key.
inline std::optional<OracleResult> enumerate_optimal(
    const Instance& inst, const VariationConfig& var, bool sizing_enabled,
    int job_cap = 8) {
  std::optional<OracleResult> best;
  std::string best_key;
  enumerate_all_feasible(
      inst, var, sizing_enabled, job_cap,
      [&](const Schedule& sched, Time objective) {
        if (!best || objective < best->objective) {
          best = OracleResult{objective, sched};
          best_key = schedule_key(sched);
        } else if (objective == best->objective) {
          std::string key = schedule_key(sched);
          if (key < best_key) {
            best->schedule = sched;
            best_key = std::move(key);
          }
        }
      });
  return best;
}

}  // namespace sbatch
