#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sbatch/instance.hpp"
#include "sbatch/schedule.hpp"
#include "sbatch/solver.hpp"

namespace sbatch {

// gap = |TWCT_model - TWCT*| / TWCT_model, guarded at 0/0.
inline double relative_gap(Time twct_model, Time twct_best) {
  if (twct_model == 0) return 0.0;
  const Time diff =
      twct_model >= twct_best ? twct_model - twct_best : twct_best - twct_model;
  return static_cast<double>(diff) / static_cast<double>(twct_model);
}

// Signed fraction, positive when the second operand is the better
// (smaller) objective.
inline double improvement_pct(Time twct_mip_t, Time twct_cp_t) {
  if (twct_mip_t == 0) return 0.0;
  return static_cast<double>(twct_mip_t - twct_cp_t) /
         static_cast<double>(twct_mip_t);
}

// ---- Matrix runner ----

struct BenchConfig {
  std::string name;
  SolverConfig solver;
};

struct BenchInstance {
  std::string name;
  Instance instance;
};

struct BenchRow {
  std::string instance;
  std::string config;
  std::string status;
  std::optional<Time> objective;
  Time lower_bound = 0;
  long long nodes = 0;
  long long elapsed_ms = 0;
  std::vector<TracePoint> trace;
  std::string error;
};

namespace bench_detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    out += c;
  }
  return out + "\"";
}

inline std::string trace_field(const std::vector<TracePoint>& trace) {
  std::string out;
  for (const TracePoint& t : trace) {
    if (!out.empty()) out += "|";
    out += std::to_string(t.ms) + ":" + std::to_string(t.obj);
  }
  return out;
}

inline std::vector<TracePoint> parse_trace_field(const std::string& field) {
  std::vector<TracePoint> out;
  std::istringstream in(field);
  std::string part;
  while (std::getline(in, part, '|')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) continue;
    out.push_back({std::stoll(part.substr(0, colon)),
                   std::stoll(part.substr(colon + 1))});
  }
  return out;
}

// class label = file stem without the trailing _i<k> replica suffix
inline std::string class_of(const std::string& instance) {
  const auto pos = instance.rfind("_i");
  if (pos == std::string::npos) return instance;
  for (std::size_t k = pos + 2; k < instance.size(); ++k)
    if (!std::isdigit(static_cast<unsigned char>(instance[k]))) return instance;
  return pos + 2 < instance.size() ? instance.substr(0, pos) : instance;
}

// incumbent at wall-clock t, step-function semantics
inline std::optional<Time> incumbent_at(const std::vector<TracePoint>& trace,
                                        long long t) {
  std::optional<Time> best;
  for (const TracePoint& p : trace) {
    if (p.ms > t) break;
    best = p.obj;
  }
  return best;
}

inline std::string fixed6(double v) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(6);
  out << v;
  return out.str();
}

}  // namespace bench_detail

inline std::vector<BenchRow> run_matrix(const std::vector<BenchInstance>& suite,
                                        const std::vector<BenchConfig>& configs,
                                        int workers = 1) {
  std::vector<BenchRow> rows(suite.size() * configs.size());
  std::atomic<std::size_t> cursor{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t k = cursor.fetch_add(1);
      if (k >= rows.size()) return;
      const BenchInstance& bi = suite[k / configs.size()];
      const BenchConfig& bc = configs[k % configs.size()];
      BenchRow& row = rows[k];
      row.instance = bi.name;
      row.config = bc.name;
      try {
        const SolveResult res = solve(bi.instance, bc.solver);
        row.status = to_string(res.status);
        row.objective = res.objective;
        row.lower_bound = res.lower_bound;
        row.nodes = res.nodes;
        row.elapsed_ms = res.elapsed.count();
        row.trace = res.trace;
      } catch (const std::exception& e) {
        row.status = "error";
        row.error = e.what();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  return rows;
}

inline std::string raw_csv(const std::vector<BenchRow>& rows) {
  using bench_detail::csv_escape;
  std::ostringstream out;
  out << "instance,config,status,objective,lower_bound,nodes,elapsed_ms,trace,"
         "error\n";
  for (const BenchRow& r : rows) {
    out << csv_escape(r.instance) << "," << csv_escape(r.config) << ","
        << r.status << ","
        << (r.objective ? std::to_string(*r.objective) : std::string()) << ","
        << r.lower_bound << "," << r.nodes << "," << r.elapsed_ms << ","
        << bench_detail::trace_field(r.trace) << "," << csv_escape(r.error)
        << "\n";
  }
  return out.str();
}

// Aggregates recomputable bit-for-bit from the raw rows: per-class mean
// relative gap with a 95% normal-approximation interval, pairwise
// better/equal/worse percentages, and a minute-by-minute improvement
// curve of every config against the first one.
inline std::string aggregates_csv(const std::vector<BenchRow>& rows,
                                  long long budget_ms) {
  using bench_detail::class_of;
  using bench_detail::fixed6;
  std::ostringstream out;

  std::vector<std::string> configs;
  for (const BenchRow& r : rows)
    if (std::find(configs.begin(), configs.end(), r.config) == configs.end())
      configs.push_back(r.config);

  // best value per instance over all configs = TWCT*
  std::map<std::string, Time> best;
  for (const BenchRow& r : rows)
    if (r.objective) {
      const auto it = best.find(r.instance);
      if (it == best.end() || *r.objective < it->second)
        best[r.instance] = *r.objective;
    }

  out << "class,config,mean_gap,ci95_lo,ci95_hi,count\n";
  std::vector<std::pair<std::string, std::string>> class_config;
  std::map<std::pair<std::string, std::string>, std::vector<double>> gaps;
  for (const BenchRow& r : rows) {
    if (!r.objective) continue;
    const auto key = std::make_pair(class_of(r.instance), r.config);
    if (gaps.find(key) == gaps.end()) class_config.push_back(key);
    gaps[key].push_back(relative_gap(*r.objective, best.at(r.instance)));
  }
  for (const auto& key : class_config) {
    const std::vector<double>& g = gaps.at(key);
    const double n = static_cast<double>(g.size());
    double mean = 0;
    for (double v : g) mean += v;
    mean /= n;
    double var = 0;
    for (double v : g) var += (v - mean) * (v - mean);
    const double sd = g.size() > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    const double half = 1.96 * sd / std::sqrt(n);
    out << bench_detail::csv_escape(key.first) << ","
        << bench_detail::csv_escape(key.second) << "," << fixed6(mean) << ","
        << fixed6(mean - half) << "," << fixed6(mean + half) << ","
        << g.size() << "\n";
  }

  out << "\nconfig_a,config_b,better_pct,equal_pct,worse_pct,count\n";
  std::map<std::pair<std::string, std::string>, Time> value;
  for (const BenchRow& r : rows)
    if (r.objective) value[{r.instance, r.config}] = *r.objective;
  std::vector<std::string> instances;
  for (const BenchRow& r : rows)
    if (std::find(instances.begin(), instances.end(), r.instance) ==
        instances.end())
      instances.push_back(r.instance);
  for (std::size_t a = 0; a < configs.size(); ++a)
    for (std::size_t b = a + 1; b < configs.size(); ++b) {
      long long better = 0, equal = 0, worse = 0;
      for (const std::string& inst : instances) {
        const auto va = value.find({inst, configs[a]});
        const auto vb = value.find({inst, configs[b]});
        if (va == value.end() || vb == value.end()) continue;
        if (va->second < vb->second) ++better;
        else if (va->second == vb->second) ++equal;
        else ++worse;
      }
      const long long n = better + equal + worse;
      const double scale = n > 0 ? 100.0 / static_cast<double>(n) : 0.0;
      out << bench_detail::csv_escape(configs[a]) << ","
          << bench_detail::csv_escape(configs[b]) << ","
          << fixed6(better * scale) << "," << fixed6(equal * scale) << ","
          << fixed6(worse * scale) << "," << n << "\n";
    }

  out << "\nminute,config,mean_improvement,coverage\n";
  const long long minutes = std::max<long long>(1, budget_ms / 60000);
  for (long long minute = 1; minute <= minutes; ++minute) {
    const long long t = std::min(minute * 60000, budget_ms);
    for (std::size_t c = 1; c < configs.size(); ++c) {
      double sum = 0;
      long long covered = 0, total = 0;
      for (const std::string& inst : instances) {
        const BenchRow* base = nullptr;
        const BenchRow* other = nullptr;
        for (const BenchRow& r : rows) {
          if (r.instance != inst) continue;
          if (r.config == configs[0]) base = &r;
          if (r.config == configs[c]) other = &r;
        }
        if (!base || !other) continue;
        ++total;
        const auto vb = bench_detail::incumbent_at(base->trace, t);
        const auto vo = bench_detail::incumbent_at(other->trace, t);
        if (!vb || !vo) continue;  // NoIncumbent: excluded, counted below
        sum += improvement_pct(*vb, *vo);
        ++covered;
      }
      out << minute << "," << bench_detail::csv_escape(configs[c]) << ","
          << fixed6(covered > 0 ? sum / static_cast<double>(covered) : 0.0)
          << ","
          << fixed6(total > 0
                        ? static_cast<double>(covered) / static_cast<double>(total)
                        : 0.0)
          << "\n";
    }
  }
  return out.str();
}

inline std::string render_csv(const std::vector<BenchRow>& rows,
                              long long budget_ms) {
  return raw_csv(rows) + "\n" + aggregates_csv(rows, budget_ms);
}

inline std::vector<BenchRow> parse_raw_csv(const std::string& text) {
  std::vector<BenchRow> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) break;
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      const char c = i < line.size() ? line[i] : ',';
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          field += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else {
        field += c;
      }
    }
    if (fields.size() != 9) continue;
    BenchRow row;
    row.instance = fields[0];
    row.config = fields[1];
    row.status = fields[2];
    if (!fields[3].empty()) row.objective = std::stoll(fields[3]);
    row.lower_bound = std::stoll(fields[4]);
    row.nodes = std::stoll(fields[5]);
    row.elapsed_ms = std::stoll(fields[6]);
    row.trace = bench_detail::parse_trace_field(fields[7]);
    row.error = fields[8];
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---- Gantt rendering ----

// Deterministic SVG: one lane per machine, job boxes colored by family,
// batch outlines, release markers, hatched setup blocks.
inline std::string gantt_svg(const Instance& inst, const Schedule& sched) {
  static const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
                                   "#59a14f", "#edc948", "#b07aa1", "#9c755f"};
  const int lanes = inst.num_machines;
  const Time unit = 12;
  Time horizon = 1;
  for (const auto& machine : sched.machines)
    for (const TimedBatch& b : machine) horizon = std::max(horizon, b.end);
  for (const Job& j : inst.jobs) horizon = std::max(horizon, j.release);

  const Time left = 60, top = 20, lane_h = 44, axis_h = 24;
  const Time width = left + horizon * unit + 40;
  const Time height = top + lanes * lane_h + axis_h;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << width << "\" height=\"" << height << "\">\n";
  out << "<defs><pattern id=\"hatch\" width=\"6\" height=\"6\" "
         "patternUnits=\"userSpaceOnUse\" patternTransform=\"rotate(45)\">"
         "<line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#888888\" "
         "stroke-width=\"2\"/></pattern></defs>\n";
  auto x_of = [&](Time t) { return left + t * unit; };

  for (int m = 0; m < lanes; ++m) {
    const Time y = top + m * lane_h;
    out << "<rect class=\"lane\" x=\"" << left << "\" y=\"" << y
        << "\" width=\"" << horizon * unit << "\" height=\"" << lane_h - 4
        << "\" fill=\"#f4f4f4\"/>\n";
    out << "<text x=\"8\" y=\"" << y + lane_h / 2
        << "\" font-size=\"12\" font-family=\"monospace\">M" << m
        << "</text>\n";
    if (m >= static_cast<int>(sched.machines.size())) continue;

    Time prev_end = 0;
    int prev_family = -1;
    for (const TimedBatch& batch : sched.machines[m]) {
      const Time gap = inst.setup(prev_family, batch.family);
      if (gap > 0) {
        const Time setup_start =
            prev_family < 0 ? batch.start - gap : prev_end;
        out << "<rect class=\"setup\" x=\"" << x_of(setup_start) << "\" y=\""
            << y + 8 << "\" width=\"" << gap * unit << "\" height=\""
            << lane_h - 20 << "\" fill=\"url(#hatch)\"/>\n";
      }
      out << "<rect class=\"batch\" x=\"" << x_of(batch.start) << "\" y=\""
          << y + 4 << "\" width=\"" << (batch.end - batch.start) * unit
          << "\" height=\"" << lane_h - 12
          << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"2\"/>\n";
      for (const TimedJob& tj : batch.jobs) {
        const Job& job = inst.jobs[inst.job_index(tj.id)];
        out << "<rect class=\"job\" x=\"" << x_of(tj.start) << "\" y=\""
            << y + 8 << "\" width=\"" << job.processing * unit
            << "\" height=\"" << lane_h - 20 << "\" fill=\""
            << kPalette[batch.family % 8] << "\"/>\n";
        out << "<text x=\"" << x_of(tj.start) + 3 << "\" y=\"" << y + lane_h / 2 + 4
            << "\" font-size=\"11\" font-family=\"monospace\">" << tj.id
            << "</text>\n";
        out << "<line class=\"release\" x1=\"" << x_of(job.release)
            << "\" y1=\"" << y + 2 << "\" x2=\"" << x_of(job.release)
            << "\" y2=\"" << y + lane_h - 6
            << "\" stroke=\"#2ca02c\" stroke-width=\"2\"/>\n";
      }
      prev_end = batch.end;
      prev_family = batch.family;
    }
  }

  const Time axis_y = top + lanes * lane_h + 4;
  out << "<line x1=\"" << left << "\" y1=\"" << axis_y << "\" x2=\""
      << x_of(horizon) << "\" y2=\"" << axis_y
      << "\" stroke=\"#000000\"/>\n";
  for (Time t = 0; t <= horizon; t += horizon > 40 ? 10 : 5)
    out << "<text x=\"" << x_of(t) << "\" y=\"" << axis_y + 14
        << "\" font-size=\"10\" font-family=\"monospace\" "
           "text-anchor=\"middle\">" << t << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace sbatch
