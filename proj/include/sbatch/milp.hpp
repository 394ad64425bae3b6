#pragma once

#include <algorithm>
#include <cctype>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "sbatch/instance.hpp"
#include "sbatch/schedule.hpp"

namespace sbatch {

struct MissingVariable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CapacityExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class VarKind { Binary, Continuous };
enum class Sense { LE, GE, EQ };

constexpr Time kNoUpper = std::numeric_limits<Time>::max();

struct MilpVariable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  Time lower = 0;
  Time upper = kNoUpper;
};

struct LinTerm {
  Time coef = 0;
  int var = -1;
};

struct MilpConstraint {
  std::string name;
  std::vector<LinTerm> terms;
  Sense sense = Sense::LE;
  Time rhs = 0;
};

struct MilpModel {
  std::vector<MilpVariable> variables;
  std::vector<MilpConstraint> constraints;
  std::vector<LinTerm> objective;  // minimize
  std::map<std::string, int> index;

  int add_var(std::string name, VarKind kind, Time lower = 0,
              Time upper = kNoUpper) {
    const int id = static_cast<int>(variables.size());
    index[name] = id;
    variables.push_back({std::move(name), kind, lower, upper});
    return id;
  }

  int var(const std::string& name) const {
    const auto it = index.find(name);
    if (it == index.end()) throw MissingVariable("unknown variable " + name);
    return it->second;
  }

  void add_constraint(std::string name, std::vector<LinTerm> terms, Sense sense,
                      Time rhs) {
    constraints.push_back({std::move(name), std::move(terms), sense, rhs});
  }
};

using MilpAssignment = std::map<std::string, Time>;

// Bracketed variable names are sanitized for the LP dialect:
// x[1,2] -> x_1_2 (deterministic, documented renaming rule).
inline std::string sanitize_name(const std::string& name) {
  std::string out;
  for (char c : name) {
    if (c == '[' || c == ',') out += '_';
    else if (c != ']') out += c;
  }
  return out;
}

// K = max_j r_j + max_f tau_0f + sum_j p_j + N * max_fg tau_fg, a horizon
// bound valid for every completion variable (N from the sizing-enabled
// batch counts, the setting both MIPs encode).
inline Time default_big_k(const Instance& inst) {
  Time max_release = 0, max_initial = 0, max_inter = 0;
  for (const Job& j : inst.jobs) max_release = std::max(max_release, j.release);
  for (Time t : inst.setups.initial) max_initial = std::max(max_initial, t);
  for (const auto& row : inst.setups.inter)
    for (Time t : row) max_inter = std::max(max_inter, t);
  const BatchCounts counts = max_batch_counts(inst, true);
  return max_release + max_initial + inst.total_processing() +
         counts.total * max_inter;
}

namespace milp_detail {

inline std::string nm(const char* base, std::initializer_list<long long> idx) {
  std::string out(base);
  out += "[";
  bool first = true;
  for (long long i : idx) {
    if (!first) out += ",";
    out += std::to_string(i);
    first = false;
  }
  return out + "]";
}

// Global batch index set B partitioned by family: the first N_0 indices
// belong to family 0, the next N_1 to family 1, and so on.
struct BatchIndex {
  std::vector<int> family_of;            // f^b
  std::vector<std::vector<int>> of_fam;  // B_f

  explicit BatchIndex(const Instance& inst) {
    const BatchCounts counts = max_batch_counts(inst, true);
    of_fam.resize(inst.num_families);
    for (int f = 0; f < inst.num_families; ++f)
      for (int k = 0; k < counts.per_family[f]; ++k) {
        of_fam[f].push_back(static_cast<int>(family_of.size()));
        family_of.push_back(f);
      }
  }

  int total() const { return static_cast<int>(family_of.size()); }
};

struct FlatBatch {
  int machine = 0;
  int position = 0;
  const TimedBatch* batch = nullptr;
};

inline std::vector<FlatBatch> flatten(const Schedule& sched) {
  std::vector<FlatBatch> out;
  for (std::size_t m = 0; m < sched.machines.size(); ++m)
    for (std::size_t b = 0; b < sched.machines[m].size(); ++b)
      out.push_back({static_cast<int>(m), static_cast<int>(b),
                     &sched.machines[m][b]});
  return out;
}

}  // namespace milp_detail

// ---- Relative Positioning MIP (item availability, preemptive, flexible) ----

inline MilpModel encode_rp(const Instance& inst, Time K) {
  using milp_detail::nm;
  MilpModel model;
  const milp_detail::BatchIndex B(inst);
  const std::vector<int> fam_sizes = inst.family_sizes();
  const int M = inst.num_machines;

  std::vector<std::vector<int>> jobs_of_fam(inst.num_families);
  for (std::size_t j = 0; j < inst.jobs.size(); ++j)
    jobs_of_fam[inst.jobs[j].family].push_back(static_cast<int>(j));

  for (const Job& j : inst.jobs)
    for (int b : B.of_fam[j.family])
      model.add_var(nm("x", {j.id, b}), VarKind::Binary, 0, 1);
  for (int b = 0; b < B.total(); ++b)
    model.add_var(nm("y", {b}), VarKind::Binary, 0, 1);
  for (int b = 0; b < B.total(); ++b)
    for (int m = 0; m < M; ++m)
      model.add_var(nm("y", {b, m}), VarKind::Binary, 0, 1);
  for (int b = 0; b < B.total(); ++b) {
    const auto& fam_jobs = jobs_of_fam[B.family_of[b]];
    for (std::size_t a = 0; a < fam_jobs.size(); ++a)
      for (std::size_t c = a + 1; c < fam_jobs.size(); ++c)
        model.add_var(nm("z", {b, inst.jobs[fam_jobs[a]].id,
                               inst.jobs[fam_jobs[c]].id}),
                      VarKind::Binary, 0, 1);
  }
  for (int a = 0; a < B.total(); ++a)
    for (int b = a + 1; b < B.total(); ++b)
      model.add_var(nm("w", {a, b}), VarKind::Binary, 0, 1);
  for (const Job& j : inst.jobs) model.add_var(nm("C", {j.id}), VarKind::Continuous);
  for (int b = 0; b < B.total(); ++b)
    model.add_var(nm("Cb", {b}), VarKind::Continuous);
  for (const Job& j : inst.jobs)
    for (int b : B.of_fam[j.family])
      model.add_var(nm("Cjb", {j.id, b}), VarKind::Continuous);

  for (const Job& j : inst.jobs)
    model.objective.push_back({j.weight, model.var(nm("C", {j.id}))});

  // each job in exactly one batch of its family
  for (const Job& j : inst.jobs) {
    std::vector<LinTerm> terms;
    for (int b : B.of_fam[j.family])
      terms.push_back({1, model.var(nm("x", {j.id, b}))});
    model.add_constraint("assign_" + std::to_string(j.id), std::move(terms),
                         Sense::EQ, 1);
  }
  // a used batch runs on exactly one machine
  for (int b = 0; b < B.total(); ++b) {
    std::vector<LinTerm> terms;
    for (int m = 0; m < M; ++m) terms.push_back({1, model.var(nm("y", {b, m}))});
    terms.push_back({-1, model.var(nm("y", {b}))});
    model.add_constraint("batch_machine_" + std::to_string(b), std::move(terms),
                         Sense::EQ, 0);
  }
  // no assignment into unused batches
  for (const Job& j : inst.jobs)
    for (int b : B.of_fam[j.family])
      model.add_constraint(
          "use_" + std::to_string(j.id) + "_" + std::to_string(b),
          {{1, model.var(nm("x", {j.id, b}))}, {-1, model.var(nm("y", {b}))}},
          Sense::LE, 0);
  // batch size requirements
  for (int b = 0; b < B.total(); ++b) {
    const int f = B.family_of[b];
    std::vector<LinTerm> lo, hi;
    for (int jidx : jobs_of_fam[f]) {
      lo.push_back({1, model.var(nm("x", {inst.jobs[jidx].id, b}))});
      hi.push_back({1, model.var(nm("x", {inst.jobs[jidx].id, b}))});
    }
    lo.push_back({-static_cast<Time>(inst.bounds.min[f]), model.var(nm("y", {b}))});
    model.add_constraint("size_lo_" + std::to_string(b), std::move(lo),
                         Sense::GE, 0);
    hi.push_back({-static_cast<Time>(fam_sizes[f]), model.var(nm("y", {b}))});
    model.add_constraint("size_hi_" + std::to_string(b), std::move(hi),
                         Sense::LE, 0);
  }
  // batch sequencing, deactivated by K unless both batches share a machine
  for (int a = 0; a < B.total(); ++a)
    for (int b = a + 1; b < B.total(); ++b)
      for (int m = 0; m < M; ++m) {
        for (int jidx : jobs_of_fam[B.family_of[b]]) {
          const Job& j = inst.jobs[jidx];
          model.add_constraint(
              "bseq_" + std::to_string(a) + "_" + std::to_string(b) + "_" +
                  std::to_string(j.id) + "_" + std::to_string(m),
              {{1, model.var(nm("Cjb", {j.id, b}))},
               {-1, model.var(nm("Cb", {a}))},
               {-K, model.var(nm("w", {a, b}))},
               {-K, model.var(nm("x", {j.id, b}))},
               {-K, model.var(nm("y", {a, m}))},
               {-K, model.var(nm("y", {b, m}))}},
              Sense::GE,
              inst.setups.inter[B.family_of[a]][B.family_of[b]] + j.processing -
                  4 * K);
        }
        for (int jidx : jobs_of_fam[B.family_of[a]]) {
          const Job& j = inst.jobs[jidx];
          model.add_constraint(
              "bseq_rev_" + std::to_string(a) + "_" + std::to_string(b) + "_" +
                  std::to_string(j.id) + "_" + std::to_string(m),
              {{1, model.var(nm("Cjb", {j.id, a}))},
               {-1, model.var(nm("Cb", {b}))},
               {K, model.var(nm("w", {a, b}))},
               {-K, model.var(nm("x", {j.id, a}))},
               {-K, model.var(nm("y", {a, m}))},
               {-K, model.var(nm("y", {b, m}))}},
              Sense::GE,
              inst.setups.inter[B.family_of[b]][B.family_of[a]] + j.processing -
                  3 * K);
        }
      }
  // releases and initial setups
  for (const Job& j : inst.jobs)
    for (int b : B.of_fam[j.family]) {
      model.add_constraint(
          "release_" + std::to_string(j.id) + "_" + std::to_string(b),
          {{1, model.var(nm("Cjb", {j.id, b}))},
           {-(j.release + j.processing), model.var(nm("y", {b}))},
           {-K, model.var(nm("x", {j.id, b}))}},
          Sense::GE, -K);
      model.add_constraint(
          "initsetup_" + std::to_string(j.id) + "_" + std::to_string(b),
          {{1, model.var(nm("Cjb", {j.id, b}))},
           {-(inst.setups.initial[j.family] + j.processing),
            model.var(nm("y", {b}))},
           {-K, model.var(nm("x", {j.id, b}))}},
          Sense::GE, -K);
    }
  // job sequencing inside a batch
  for (int b = 0; b < B.total(); ++b) {
    const auto& fam_jobs = jobs_of_fam[B.family_of[b]];
    for (std::size_t a = 0; a < fam_jobs.size(); ++a)
      for (std::size_t c = a + 1; c < fam_jobs.size(); ++c) {
        const Job& ji = inst.jobs[fam_jobs[a]];
        const Job& jj = inst.jobs[fam_jobs[c]];
        const int z = model.var(nm("z", {b, ji.id, jj.id}));
        model.add_constraint(
            "jseq_" + std::to_string(b) + "_" + std::to_string(ji.id) + "_" +
                std::to_string(jj.id),
            {{1, model.var(nm("Cjb", {jj.id, b}))},
             {-1, model.var(nm("Cjb", {ji.id, b}))},
             {-jj.processing, model.var(nm("y", {b}))},
             {-K, z},
             {-K, model.var(nm("x", {ji.id, b}))},
             {-K, model.var(nm("x", {jj.id, b}))}},
            Sense::GE, -3 * K);
        model.add_constraint(
            "jseq_rev_" + std::to_string(b) + "_" + std::to_string(ji.id) +
                "_" + std::to_string(jj.id),
            {{1, model.var(nm("Cjb", {ji.id, b}))},
             {-1, model.var(nm("Cjb", {jj.id, b}))},
             {-ji.processing, model.var(nm("y", {b}))},
             {K, z},
             {-K, model.var(nm("x", {ji.id, b}))},
             {-K, model.var(nm("x", {jj.id, b}))}},
            Sense::GE, -2 * K);
      }
  }
  // batch completion and item availability
  for (int b = 0; b < B.total(); ++b)
    for (int jidx : jobs_of_fam[B.family_of[b]]) {
      const Job& j = inst.jobs[jidx];
      model.add_constraint(
          "bcomp_" + std::to_string(b) + "_" + std::to_string(j.id),
          {{1, model.var(nm("Cb", {b}))},
           {-1, model.var(nm("Cjb", {j.id, b}))},
           {-K, model.var(nm("x", {j.id, b}))}},
          Sense::GE, -K);
      model.add_constraint(
          "item_" + std::to_string(j.id) + "_" + std::to_string(b),
          {{1, model.var(nm("C", {j.id}))},
           {-1, model.var(nm("Cjb", {j.id, b}))},
           {-K, model.var(nm("x", {j.id, b}))}},
          Sense::GE, -K);
    }
  return model;
}

// ---- Positional Assignment MIP (batch availability, complete initiation) ----

inline MilpModel encode_pa(const Instance& inst, Time K) {
  using milp_detail::nm;
  MilpModel model;
  const int N = static_cast<int>(max_batch_counts(inst, true).total);
  const int M = inst.num_machines;
  const int F = inst.num_families;
  const std::vector<int> fam_sizes = inst.family_sizes();

  std::vector<std::vector<int>> jobs_of_fam(F);
  for (std::size_t j = 0; j < inst.jobs.size(); ++j)
    jobs_of_fam[inst.jobs[j].family].push_back(static_cast<int>(j));

  for (const Job& j : inst.jobs)
    for (int b = 1; b <= N; ++b)
      for (int m = 0; m < M; ++m)
        model.add_var(nm("x", {j.id, b, m}), VarKind::Binary, 0, 1);
  for (int f = 0; f < F; ++f)
    for (int b = 1; b <= N; ++b)
      for (int m = 0; m < M; ++m)
        model.add_var(nm("y", {f, b, m}), VarKind::Binary, 0, 1);
  for (int b = 1; b <= N; ++b)
    for (int m = 0; m < M; ++m) {
      model.add_var(nm("S", {b, m}), VarKind::Continuous);
      model.add_var(nm("P", {b, m}), VarKind::Continuous);
      model.add_var(nm("Cb", {b, m}), VarKind::Continuous);
    }
  for (const Job& j : inst.jobs) model.add_var(nm("C", {j.id}), VarKind::Continuous);

  for (const Job& j : inst.jobs)
    model.objective.push_back({j.weight, model.var(nm("C", {j.id}))});

  // each job on exactly one slot of one machine
  for (const Job& j : inst.jobs) {
    std::vector<LinTerm> terms;
    for (int b = 1; b <= N; ++b)
      for (int m = 0; m < M; ++m)
        terms.push_back({1, model.var(nm("x", {j.id, b, m}))});
    model.add_constraint("assign_" + std::to_string(j.id), std::move(terms),
                         Sense::EQ, 1);
  }
  // at most one family per slot
  for (int b = 1; b <= N; ++b)
    for (int m = 0; m < M; ++m) {
      std::vector<LinTerm> terms;
      for (int f = 0; f < F; ++f)
        terms.push_back({1, model.var(nm("y", {f, b, m}))});
      model.add_constraint(
          "one_family_" + std::to_string(b) + "_" + std::to_string(m),
          std::move(terms), Sense::LE, 1);
    }
  // jobs only into slots of their family
  for (const Job& j : inst.jobs)
    for (int b = 1; b <= N; ++b)
      for (int m = 0; m < M; ++m)
        model.add_constraint(
            "family_" + std::to_string(j.id) + "_" + std::to_string(b) + "_" +
                std::to_string(m),
            {{1, model.var(nm("x", {j.id, b, m}))},
             {-1, model.var(nm("y", {j.family, b, m}))}},
            Sense::LE, 0);
  // batch size requirements per slot
  for (int b = 1; b <= N; ++b)
    for (int m = 0; m < M; ++m)
      for (int f = 0; f < F; ++f) {
        std::vector<LinTerm> lo, hi;
        for (int jidx : jobs_of_fam[f]) {
          lo.push_back({1, model.var(nm("x", {inst.jobs[jidx].id, b, m}))});
          hi.push_back({1, model.var(nm("x", {inst.jobs[jidx].id, b, m}))});
        }
        lo.push_back(
            {-static_cast<Time>(inst.bounds.min[f]), model.var(nm("y", {f, b, m}))});
        model.add_constraint("size_lo_" + std::to_string(b) + "_" +
                                 std::to_string(m) + "_" + std::to_string(f),
                             std::move(lo), Sense::GE, 0);
        hi.push_back(
            {-static_cast<Time>(fam_sizes[f]), model.var(nm("y", {f, b, m}))});
        model.add_constraint("size_hi_" + std::to_string(b) + "_" +
                                 std::to_string(m) + "_" + std::to_string(f),
                             std::move(hi), Sense::LE, 0);
      }
  // empty slots after non-empty ones
  for (int b = 2; b <= N; ++b)
    for (int m = 0; m < M; ++m) {
      std::vector<LinTerm> terms;
      for (int f = 0; f < F; ++f) {
        terms.push_back({1, model.var(nm("y", {f, b - 1, m}))});
        terms.push_back({-1, model.var(nm("y", {f, b, m}))});
      }
      model.add_constraint(
          "empty_last_" + std::to_string(b) + "_" + std::to_string(m),
          std::move(terms), Sense::GE, 0);
    }
  // slot processing times
  for (int b = 1; b <= N; ++b)
    for (int m = 0; m < M; ++m) {
      std::vector<LinTerm> terms{{1, model.var(nm("P", {b, m}))}};
      for (const Job& j : inst.jobs)
        terms.push_back({-j.processing, model.var(nm("x", {j.id, b, m}))});
      model.add_constraint(
          "proc_" + std::to_string(b) + "_" + std::to_string(m),
          std::move(terms), Sense::GE, 0);
    }
  // initial setups on the first slot
  for (int m = 0; m < M; ++m) {
    std::vector<LinTerm> terms{{1, model.var(nm("S", {1, m}))}};
    for (int f = 0; f < F; ++f)
      terms.push_back({-inst.setups.initial[f], model.var(nm("y", {f, 1, m}))});
    model.add_constraint("initsetup_" + std::to_string(m), std::move(terms),
                         Sense::GE, 0);
  }
  // inter-family setups between consecutive slots
  for (int b = 2; b <= N; ++b)
    for (int m = 0; m < M; ++m)
      for (int g = 0; g < F; ++g)
        for (int f = 0; f < F; ++f)
          model.add_constraint(
              "setup_" + std::to_string(b) + "_" + std::to_string(m) + "_" +
                  std::to_string(g) + "_" + std::to_string(f),
              {{1, model.var(nm("S", {b, m}))},
               {-1, model.var(nm("Cb", {b - 1, m}))},
               {-K, model.var(nm("y", {g, b - 1, m}))},
               {-K, model.var(nm("y", {f, b, m}))}},
              Sense::GE, inst.setups.inter[g][f] - 2 * K);
  // complete initiation
  for (const Job& j : inst.jobs)
    for (int b = 1; b <= N; ++b)
      for (int m = 0; m < M; ++m)
        model.add_constraint(
            "release_" + std::to_string(j.id) + "_" + std::to_string(b) + "_" +
                std::to_string(m),
            {{1, model.var(nm("S", {b, m}))},
             {-j.release, model.var(nm("x", {j.id, b, m}))}},
            Sense::GE, 0);
  // slot completion
  for (int b = 1; b <= N; ++b)
    for (int m = 0; m < M; ++m)
      model.add_constraint(
          "comp_" + std::to_string(b) + "_" + std::to_string(m),
          {{1, model.var(nm("Cb", {b, m}))},
           {-1, model.var(nm("S", {b, m}))},
           {-1, model.var(nm("P", {b, m}))}},
          Sense::GE, 0);
  // batch availability
  for (const Job& j : inst.jobs)
    for (int b = 1; b <= N; ++b)
      for (int m = 0; m < M; ++m)
        model.add_constraint(
            "avail_" + std::to_string(j.id) + "_" + std::to_string(b) + "_" +
                std::to_string(m),
            {{1, model.var(nm("C", {j.id}))},
             {-1, model.var(nm("Cb", {b, m}))},
             {-K, model.var(nm("x", {j.id, b, m}))}},
            Sense::GE, -K);
  return model;
}

// ---- Schedule-to-assignment translators ----

inline MilpAssignment schedule_to_rp_assignment(const Instance& inst,
                                                const Schedule& sched,
                                                Time K = -1) {
  using milp_detail::nm;
  if (K < 0) K = default_big_k(inst);
  const milp_detail::BatchIndex B(inst);
  auto flat = milp_detail::flatten(sched);

  // batches of each family mapped to B_f indices in start order
  std::vector<int> index_of(flat.size(), -1);
  for (int f = 0; f < inst.num_families; ++f) {
    std::vector<int> mine;
    for (std::size_t i = 0; i < flat.size(); ++i)
      if (flat[i].batch->family == f) mine.push_back(static_cast<int>(i));
    std::sort(mine.begin(), mine.end(), [&](int a, int b) {
      return std::tie(flat[a].batch->start, flat[a].machine, flat[a].position) <
             std::tie(flat[b].batch->start, flat[b].machine, flat[b].position);
    });
    if (mine.size() > B.of_fam[f].size())
      throw CapacityExceeded("schedule uses more than N_f batches of family " +
                             std::to_string(f));
    for (std::size_t k = 0; k < mine.size(); ++k)
      index_of[mine[k]] = B.of_fam[f][k];
  }

  MilpAssignment a;
  std::vector<int> machine_of(B.total(), -1);
  std::vector<Time> batch_completion(B.total(), 0);
  std::vector<Time> batch_start(B.total(), 0);
  std::vector<char> used(B.total(), 0);
  std::map<int, int> batch_of_job;    // job id -> batch index
  std::map<int, Time> completion_of;  // job id -> completion

  for (std::size_t i = 0; i < flat.size(); ++i) {
    const int b = index_of[i];
    used[b] = 1;
    machine_of[b] = flat[i].machine;
    batch_start[b] = flat[i].batch->start;
    for (const TimedJob& tj : flat[i].batch->jobs) {
      const Job& job = inst.jobs[inst.job_index(tj.id)];
      batch_of_job[tj.id] = b;
      completion_of[tj.id] = tj.start + job.processing;
      batch_completion[b] =
          std::max(batch_completion[b], tj.start + job.processing);
    }
  }

  std::vector<std::vector<int>> jobs_of_fam(inst.num_families);
  for (std::size_t j = 0; j < inst.jobs.size(); ++j)
    jobs_of_fam[inst.jobs[j].family].push_back(static_cast<int>(j));

  for (const Job& j : inst.jobs)
    for (int b : B.of_fam[j.family])
      a[nm("x", {j.id, b})] = (batch_of_job.at(j.id) == b) ? 1 : 0;
  for (int b = 0; b < B.total(); ++b) {
    a[nm("y", {b})] = used[b] ? 1 : 0;
    for (int m = 0; m < inst.num_machines; ++m)
      a[nm("y", {b, m})] = (used[b] && machine_of[b] == m) ? 1 : 0;
    a[nm("Cb", {b})] = batch_completion[b];
  }
  for (int b = 0; b < B.total(); ++b) {
    const auto& fam_jobs = jobs_of_fam[B.family_of[b]];
    for (std::size_t p = 0; p < fam_jobs.size(); ++p)
      for (std::size_t q = p + 1; q < fam_jobs.size(); ++q) {
        const int i_id = inst.jobs[fam_jobs[p]].id;
        const int j_id = inst.jobs[fam_jobs[q]].id;
        Time v = 0;
        if (used[b] && batch_of_job.at(i_id) == b && batch_of_job.at(j_id) == b)
          v = completion_of.at(i_id) < completion_of.at(j_id) ? 1 : 0;
        a[nm("z", {b, i_id, j_id})] = v;
      }
  }
  for (int p = 0; p < B.total(); ++p)
    for (int q = p + 1; q < B.total(); ++q) {
      Time v = 0;
      if (used[p] && used[q])
        v = std::tie(batch_start[p], machine_of[p]) <
                    std::tie(batch_start[q], machine_of[q])
                ? 1
                : 0;
      a[nm("w", {p, q})] = v;
    }
  for (const Job& j : inst.jobs) {
    a[nm("C", {j.id})] = completion_of.at(j.id);
    // the appendix leaves unused completion variables free; pinning them
    // to the horizon keeps every deactivated big-K row slack
    for (int b : B.of_fam[j.family])
      a[nm("Cjb", {j.id, b})] =
          batch_of_job.at(j.id) == b ? completion_of.at(j.id) : K;
  }
  return a;
}

inline MilpAssignment schedule_to_pa_assignment(const Instance& inst,
                                                const Schedule& sched) {
  using milp_detail::nm;
  const int N = static_cast<int>(max_batch_counts(inst, true).total);
  const int M = inst.num_machines;
  MilpAssignment a;

  for (const Job& j : inst.jobs) {
    a[nm("C", {j.id})] = 0;
    for (int b = 1; b <= N; ++b)
      for (int m = 0; m < M; ++m) a[nm("x", {j.id, b, m})] = 0;
  }
  for (int f = 0; f < inst.num_families; ++f)
    for (int b = 1; b <= N; ++b)
      for (int m = 0; m < M; ++m) a[nm("y", {f, b, m})] = 0;
  for (int b = 1; b <= N; ++b)
    for (int m = 0; m < M; ++m) {
      a[nm("S", {b, m})] = 0;
      a[nm("P", {b, m})] = 0;
      a[nm("Cb", {b, m})] = 0;
    }

  for (int m = 0; m < M && m < static_cast<int>(sched.machines.size()); ++m) {
    if (static_cast<int>(sched.machines[m].size()) > N)
      throw CapacityExceeded("schedule uses more than N slots on machine " +
                             std::to_string(m));
    for (std::size_t pos = 0; pos < sched.machines[m].size(); ++pos) {
      const TimedBatch& batch = sched.machines[m][pos];
      const int b = static_cast<int>(pos) + 1;
      a[nm("y", {batch.family, b, m})] = 1;
      Time total_p = 0;
      for (const TimedJob& tj : batch.jobs) {
        const Job& job = inst.jobs[inst.job_index(tj.id)];
        a[nm("x", {tj.id, b, m})] = 1;
        a[nm("C", {tj.id})] = batch.end;
        total_p += job.processing;
      }
      a[nm("S", {b, m})] = batch.start;
      a[nm("P", {b, m})] = total_p;
      a[nm("Cb", {b, m})] = batch.end;
    }
  }
  return a;
}

// ---- Exact arithmetic checker ----

struct CheckResult {
  bool feasible = false;
  Time objective = 0;
  std::vector<std::string> violated;
};

inline CheckResult check_assignment(const MilpModel& model,
                                    const MilpAssignment& assignment) {
  // Values may be keyed by model names or their sanitized LP forms.
  auto value = [&](const MilpVariable& v) -> Time {
    auto it = assignment.find(v.name);
    if (it == assignment.end()) it = assignment.find(sanitize_name(v.name));
    if (it == assignment.end())
      throw MissingVariable("assignment missing variable " + v.name);
    return it->second;
  };

  CheckResult out;
  std::vector<Time> values(model.variables.size());
  for (std::size_t i = 0; i < model.variables.size(); ++i) {
    const MilpVariable& v = model.variables[i];
    values[i] = value(v);
    if (values[i] < v.lower || (v.upper != kNoUpper && values[i] > v.upper))
      out.violated.push_back("bound:" + v.name);
    if (v.kind == VarKind::Binary && values[i] != 0 && values[i] != 1)
      out.violated.push_back("binary:" + v.name);
  }
  for (const MilpConstraint& c : model.constraints) {
    Time lhs = 0;
    for (const LinTerm& t : c.terms) lhs += t.coef * values[t.var];
    const bool ok = c.sense == Sense::LE   ? lhs <= c.rhs
                    : c.sense == Sense::GE ? lhs >= c.rhs
                                           : lhs == c.rhs;
    if (!ok) out.violated.push_back(c.name);
  }
  for (const LinTerm& t : model.objective)
    out.objective += t.coef * values[t.var];
  out.feasible = out.violated.empty();
  return out;
}

// Slack of every constraint, for big-K validity checks: how far the
// row is inside its feasible side (negative = violated).
inline Time constraint_slack(const MilpModel& model, const MilpConstraint& c,
                             const std::vector<Time>& values) {
  Time lhs = 0;
  for (const LinTerm& t : c.terms) lhs += t.coef * values[t.var];
  switch (c.sense) {
    case Sense::LE: return c.rhs - lhs;
    case Sense::GE: return lhs - c.rhs;
    default: return lhs == c.rhs ? 0 : -1;
  }
}

// ---- LP text format ----

inline std::string write_lp(const MilpModel& model) {
  std::ostringstream out;
  auto emit_terms = [&](const std::vector<LinTerm>& terms) {
    if (terms.empty()) {
      out << "0";
      return;
    }
    bool first = true;
    for (const LinTerm& t : terms) {
      const Time c = t.coef;
      if (first) {
        if (c < 0) out << "- ";
        first = false;
      } else {
        out << (c < 0 ? " - " : " + ");
      }
      out << (c < 0 ? -c : c) << " "
          << sanitize_name(model.variables[t.var].name);
    }
  };

  out << "Minimize\n obj: ";
  emit_terms(model.objective);
  out << "\nSubject To\n";
  for (const MilpConstraint& c : model.constraints) {
    out << " " << c.name << ": ";
    emit_terms(c.terms);
    out << (c.sense == Sense::LE ? " <= " : c.sense == Sense::GE ? " >= " : " = ")
        << c.rhs << "\n";
  }
  bool bounds_header = false;
  for (const MilpVariable& v : model.variables) {
    if (v.kind == VarKind::Binary) continue;
    if (v.lower == 0 && v.upper == kNoUpper) continue;
    if (!bounds_header) {
      out << "Bounds\n";
      bounds_header = true;
    }
    out << " " << v.lower << " <= " << sanitize_name(v.name);
    if (v.upper != kNoUpper) out << " <= " << v.upper;
    out << "\n";
  }
  bool binary_header = false;
  for (const MilpVariable& v : model.variables) {
    if (v.kind != VarKind::Binary) continue;
    if (!binary_header) {
      out << "Binary\n";
      binary_header = true;
    }
    out << " " << sanitize_name(v.name) << "\n";
  }
  out << "End\n";
  return out.str();
}

// Reader for the dialect produced by write_lp. Round-trips the model
// structure (names sanitized, declaration order preserved).
inline MilpModel read_lp(const std::string& text) {
  MilpModel model;
  auto ensure_var = [&](const std::string& name) -> int {
    auto it = model.index.find(name);
    if (it != model.index.end()) return it->second;
    return model.add_var(name, VarKind::Continuous);
  };
  auto parse_terms = [&](const std::string& expr) {
    std::vector<LinTerm> terms;
    std::istringstream in(expr);
    std::string tok;
    Time sign = 1;
    std::optional<Time> coef;
    while (in >> tok) {
      if (tok == "+") {
        sign = 1;
      } else if (tok == "-") {
        sign = -1;
      } else if (std::isdigit(static_cast<unsigned char>(tok[0]))) {
        coef = sign * std::stoll(tok);
      } else {
        terms.push_back({coef.value_or(sign), ensure_var(tok)});
        sign = 1;
        coef.reset();
      }
    }
    return terms;
  };

  enum Section { None, Objective, Constraints, Bounds, Binaries };
  Section section = None;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    auto strip = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    if (line == "Minimize") { section = Objective; continue; }
    if (line == "Subject To") { section = Constraints; continue; }
    if (line == "Bounds") { section = Bounds; continue; }
    if (line == "Binary") { section = Binaries; continue; }
    if (line == "End") break;

    if (section == Objective) {
      const auto colon = line.find(':');
      const std::string expr = colon == std::string::npos
                                   ? line
                                   : line.substr(colon + 1);
      if (strip(expr) != "0") model.objective = parse_terms(expr);
    } else if (section == Constraints) {
      const auto colon = line.find(':');
      if (colon == std::string::npos)
        throw std::invalid_argument("constraint without name: " + line);
      const std::string name = strip(line.substr(0, colon));
      std::string body = line.substr(colon + 1);
      Sense sense;
      std::size_t pos;
      if ((pos = body.find("<=")) != std::string::npos) sense = Sense::LE;
      else if ((pos = body.find(">=")) != std::string::npos) sense = Sense::GE;
      else if ((pos = body.find('=')) != std::string::npos) sense = Sense::EQ;
      else throw std::invalid_argument("constraint without sense: " + line);
      const std::size_t skip = sense == Sense::EQ ? 1 : 2;
      const Time rhs = std::stoll(strip(body.substr(pos + skip)));
      std::vector<LinTerm> terms = parse_terms(body.substr(0, pos));
      model.add_constraint(name, std::move(terms), sense, rhs);
    } else if (section == Bounds) {
      // " lo <= name <= hi" or " lo <= name"
      std::istringstream in(line);
      std::string a, le1, name, le2, b;
      in >> a >> le1 >> name;
      MilpVariable& v = model.variables[ensure_var(name)];
      v.lower = std::stoll(a);
      if (in >> le2 >> b) v.upper = std::stoll(b);
    } else if (section == Binaries) {
      std::istringstream in(line);
      std::string name;
      while (in >> name) {
        MilpVariable& v = model.variables[ensure_var(name)];
        v.kind = VarKind::Binary;
        v.lower = 0;
        v.upper = 1;
      }
    }
  }
  return model;
}

}  // namespace sbatch
