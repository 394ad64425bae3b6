#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbatch/instance.hpp"

namespace sbatch {

struct TimedJob {
  int id = 0;
  Time start = 0;
};

struct TimedBatch {
  int family = 0;
  std::vector<TimedJob> jobs;  // in processing order
  Time start = 0;              // = first job start
  Time end = 0;                // = last job end
};

// Per-machine ordered batch lists.
struct Schedule {
  std::vector<std::vector<TimedBatch>> machines;
};

struct Violation {
  std::string rule;
  std::string detail;
};

struct EvalReport {
  bool feasible = false;
  std::vector<Violation> violations;
  std::optional<Time> twct;
  std::map<int, Time> job_completions;
};

namespace detail {

// TWCT of a structurally sound schedule; no feasibility checking here.
inline Time twct_unchecked(const Instance& inst, const Schedule& sched,
                           Availability availability) {
  Time total = 0;
  for (const auto& machine : sched.machines) {
    for (const TimedBatch& batch : machine) {
      for (const TimedJob& tj : batch.jobs) {
        const Job& job = inst.jobs[inst.job_index(tj.id)];
        const Time completion = availability == Availability::Item
                                    ? tj.start + job.processing
                                    : batch.end;
        total += static_cast<Time>(job.weight) * completion;
      }
    }
  }
  return total;
}

}  // namespace detail

inline EvalReport check_feasibility(const Instance& inst, const Schedule& sched,
                                    const VariationConfig& var,
                                    bool sizing_enabled) {
  EvalReport report;
  auto add = [&](const char* rule, std::string detail) {
    report.violations.push_back({rule, std::move(detail)});
  };

  if (static_cast<int>(sched.machines.size()) > inst.num_machines)
    add("partition", "schedule uses more machines than the instance has");

  // (1) each job scheduled exactly once
  std::map<int, int> occurrences;
  for (const auto& machine : sched.machines)
    for (const TimedBatch& batch : machine)
      for (const TimedJob& tj : batch.jobs) ++occurrences[tj.id];
  for (const Job& job : inst.jobs) {
    const auto it = occurrences.find(job.id);
    if (it == occurrences.end())
      add("partition", "job " + std::to_string(job.id) + " is not scheduled");
    else if (it->second > 1)
      add("partition", "job " + std::to_string(job.id) + " appears " +
                           std::to_string(it->second) + " times");
  }
  for (const auto& [id, count] : occurrences)
    if (inst.job_index(id) < 0)
      add("partition", "unknown job id " + std::to_string(id));
  if (!report.violations.empty() &&
      report.violations.back().rule == std::string("partition")) {
    // fall through; remaining checks still run on whatever is referenced
  }

  for (std::size_t m = 0; m < sched.machines.size(); ++m) {
    Time prev_end = 0;
    int prev_family = -1;
    for (std::size_t b = 0; b < sched.machines[m].size(); ++b) {
      const TimedBatch& batch = sched.machines[m][b];
      const std::string where =
          "machine " + std::to_string(m) + " batch " + std::to_string(b);
      if (batch.family < 0 || batch.family >= inst.num_families) {
        add("batch-structure", where + ": invalid family");
        continue;
      }
      if (batch.jobs.empty()) {
        add("batch-structure", where + ": empty batch");
        continue;
      }

      // (2) releases, (3) family purity and intra-batch disjointness
      Time cursor = batch.start;
      Time max_release = 0;
      Time sum_processing = 0;
      bool structure_ok = true;
      for (std::size_t k = 0; k < batch.jobs.size(); ++k) {
        const TimedJob& tj = batch.jobs[k];
        const int idx = inst.job_index(tj.id);
        if (idx < 0) continue;
        const Job& job = inst.jobs[idx];
        if (job.family != batch.family)
          add("family-purity", where + ": job " + std::to_string(tj.id) +
                                   " of family " + std::to_string(job.family));
        if (tj.start < job.release)
          add("release", "job " + std::to_string(tj.id) + " starts at " +
                             std::to_string(tj.start) + " before release " +
                             std::to_string(job.release));
        if (k > 0 && tj.start < cursor) {
          add("intra-batch-overlap",
              where + ": job " + std::to_string(tj.id) + " overlaps or is " +
                  "out of order");
          structure_ok = false;
        }
        cursor = tj.start + job.processing;
        max_release = std::max(max_release, job.release);
        sum_processing += job.processing;
      }
      if (batch.start != batch.jobs.front().start)
        add("batch-structure", where + ": start differs from first job start");
      if (structure_ok && batch.end != cursor)
        add("batch-structure", where + ": end differs from last job end");

      // (4) setup gaps, including the initial setup
      const Time gap = inst.setup(prev_family, batch.family);
      const Time earliest = (prev_family < 0 ? gap : prev_end + gap);
      if (batch.start < earliest)
        add("setup", where + ": starts at " + std::to_string(batch.start) +
                         " before " + std::to_string(earliest));

      // (5) sizing
      if (sizing_enabled) {
        const int size = static_cast<int>(batch.jobs.size());
        if (size < inst.bounds.min[batch.family])
          add("min-batch-size", where + ": size " + std::to_string(size) +
                                    " < l_" + std::to_string(batch.family) +
                                    " = " +
                                    std::to_string(inst.bounds.min[batch.family]));
        if (size > inst.bounds.max[batch.family])
          add("max-batch-size", where + ": size " + std::to_string(size) +
                                    " > u_" + std::to_string(batch.family) +
                                    " = " +
                                    std::to_string(inst.bounds.max[batch.family]));
      }

      // (6) non-preemption: no internal idle
      if (var.preemption == Preemption::Forbidden &&
          batch.end - batch.start != sum_processing)
        add("non-preemption", where + ": duration " +
                                  std::to_string(batch.end - batch.start) +
                                  " != total processing " +
                                  std::to_string(sum_processing));

      // (7) complete initiation
      if (var.initiation == Initiation::Complete && batch.start < max_release)
        add("complete-initiation",
            where + ": starts at " + std::to_string(batch.start) +
                " before member release " + std::to_string(max_release));

      prev_end = batch.end;
      prev_family = batch.family;
    }
  }

  report.feasible = report.violations.empty();
  if (report.feasible) {
    for (const auto& machine : sched.machines)
      for (const TimedBatch& batch : machine)
        for (const TimedJob& tj : batch.jobs) {
          const Job& job = inst.jobs[inst.job_index(tj.id)];
          report.job_completions[tj.id] =
              var.availability == Availability::Item ? tj.start + job.processing
                                                     : batch.end;
        }
    report.twct = detail::twct_unchecked(inst, sched, var.availability);
  }
  return report;
}

// TWCT of a feasible schedule. Throws if the schedule does not pass
// check_feasibility under the given variation.
inline Time evaluate_twct(const Instance& inst, const Schedule& sched,
                          const VariationConfig& var,
                          bool sizing_enabled = true) {
  const EvalReport report = check_feasibility(inst, sched, var, sizing_enabled);
  if (!report.feasible) {
    std::ostringstream msg;
    msg << "evaluate_twct on infeasible schedule:";
    for (const Violation& v : report.violations)
      msg << " [" << v.rule << "] " << v.detail << ";";
    throw std::invalid_argument(msg.str());
  }
  return *report.twct;
}

// ---- Untimed sequencing + earliest-start timing ----

struct SequencedBatch {
  int family = 0;
  std::vector<int> job_ids;  // in processing order
};

// Per-machine ordered batches with ordered jobs; no times yet.
using Sequencing = std::vector<std::vector<SequencedBatch>>;

// Earliest-start timing of one batch given the earliest allowed start
// ("base" = previous end + setup, or the initial setup). Optimal for TWCT
// because every completion is non-decreasing in every start.
inline TimedBatch time_batch(const Instance& inst, Time base,
                             const SequencedBatch& seq,
                             const VariationConfig& var) {
  TimedBatch batch;
  batch.family = seq.family;

  Time start = base;
  if (var.initiation == Initiation::Complete) {
    for (int id : seq.job_ids)
      start = std::max(start, inst.jobs[inst.job_index(id)].release);
  } else if (var.preemption == Preemption::Forbidden) {
    Time offset = 0;
    for (int id : seq.job_ids) {
      const Job& job = inst.jobs[inst.job_index(id)];
      start = std::max(start, job.release - offset);
      offset += job.processing;
    }
  }

  // Complete initiation and forbidden preemption both run contiguously
  // from the batch start; the per-job max only bites in the flexible
  // preemptive case.
  Time cursor = start;
  for (int id : seq.job_ids) {
    const Job& job = inst.jobs[inst.job_index(id)];
    Time s = cursor;
    if (var.initiation == Initiation::Flexible &&
        var.preemption == Preemption::Allowed)
      s = std::max(s, job.release);
    batch.jobs.push_back({id, s});
    cursor = s + job.processing;
  }
  batch.start = batch.jobs.front().start;
  batch.end = cursor;
  return batch;
}

inline Schedule left_shift_timing(const Instance& inst, const Sequencing& seq,
                                  const VariationConfig& var) {
  Schedule sched;
  sched.machines.resize(seq.size());
  for (std::size_t m = 0; m < seq.size(); ++m) {
    Time prev_end = 0;
    int prev_family = -1;
    for (const SequencedBatch& sb : seq[m]) {
      if (sb.job_ids.empty())
        throw std::invalid_argument("left_shift_timing: empty batch");
      const Time gap = inst.setup(prev_family, sb.family);
      const Time base = prev_family < 0 ? gap : prev_end + gap;
      TimedBatch batch = time_batch(inst, base, sb, var);
      prev_end = batch.end;
      prev_family = batch.family;
      sched.machines[m].push_back(std::move(batch));
    }
  }
  return sched;
}

inline Sequencing sequencing_of(const Schedule& sched) {
  Sequencing seq(sched.machines.size());
  for (std::size_t m = 0; m < sched.machines.size(); ++m)
    for (const TimedBatch& batch : sched.machines[m]) {
      SequencedBatch sb;
      sb.family = batch.family;
      for (const TimedJob& tj : batch.jobs) sb.job_ids.push_back(tj.id);
      seq[m].push_back(std::move(sb));
    }
  return seq;
}

// ---- JSON ----

inline nlohmann::json schedule_to_json(const Schedule& sched) {
  nlohmann::json machines = nlohmann::json::array();
  for (const auto& machine : sched.machines) {
    nlohmann::json batches = nlohmann::json::array();
    for (const TimedBatch& batch : machine) {
      nlohmann::json jobs = nlohmann::json::array();
      for (const TimedJob& tj : batch.jobs)
        jobs.push_back({{"id", tj.id}, {"start", tj.start}});
      batches.push_back({{"family", batch.family}, {"jobs", jobs}});
    }
    machines.push_back(batches);
  }
  return {{"machines", machines}};
}

// Starts come from the file; batch start/end are recomputed from them.
inline Schedule schedule_from_json(const Instance& inst,
                                   const nlohmann::json& j) {
  Schedule sched;
  for (const auto& machine : j.at("machines")) {
    std::vector<TimedBatch> batches;
    for (const auto& jb : machine) {
      TimedBatch batch;
      batch.family = jb.at("family").get<int>();
      for (const auto& jj : jb.at("jobs"))
        batch.jobs.push_back({jj.at("id").get<int>(), jj.at("start").get<Time>()});
      if (!batch.jobs.empty()) {
        batch.start = batch.jobs.front().start;
        const TimedJob& last = batch.jobs.back();
        const int idx = inst.job_index(last.id);
        batch.end = last.start + (idx >= 0 ? inst.jobs[idx].processing : 0);
      }
      batches.push_back(std::move(batch));
    }
    sched.machines.push_back(std::move(batches));
  }
  return sched;
}

// Canonical ordering key, used for reproducible tie-breaking.
inline std::string schedule_key(const Schedule& sched) {
  std::ostringstream out;
  for (const auto& machine : sched.machines) {
    out << "[";
    for (const TimedBatch& batch : machine) {
      out << "(" << batch.family << ":";
      for (const TimedJob& tj : batch.jobs) out << tj.id << "@" << tj.start << ",";
      out << ")";
    }
    out << "]";
  }
  return out.str();
}

}  // namespace sbatch
