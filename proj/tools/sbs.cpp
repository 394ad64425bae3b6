// sbs: s-batch scheduling toolkit front end.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sbatch/bench.hpp"
#include "sbatch/genins.hpp"
#include "sbatch/instance.hpp"
#include "sbatch/milp.hpp"
#include "sbatch/oracle.hpp"
#include "sbatch/schedule.hpp"
#include "sbatch/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UserError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::chrono::milliseconds parse_duration(const std::string& text) {
  std::size_t idx = 0;
  long long value = 0;
  try {
    value = std::stoll(text, &idx);
  } catch (const std::exception&) {
    throw UserError("bad duration: " + text);
  }
  const std::string unit = text.substr(idx);
  if (unit == "ms") return std::chrono::milliseconds(value);
  if (unit == "s" || unit.empty()) return std::chrono::milliseconds(value * 1000);
  if (unit == "m") return std::chrono::milliseconds(value * 60000);
  throw UserError("bad duration unit: " + text);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw UserError("cannot write " + path);
  out << content;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-")
    std::cout << content;
  else
    spit(out_path, content);
}

sbatch::Instance load_instance(const std::string& path) {
  sbatch::Instance inst;
  try {
    inst = sbatch::instance_from_json(json::parse(slurp(path)));
  } catch (const json::exception& e) {
    throw UserError(path + ": " + e.what());
  }
  const auto problems = sbatch::validate_instance(inst);
  if (!problems.empty()) {
    std::string msg = path + " is not a valid instance:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw UserError(msg);
  }
  return inst;
}

struct VariationFlags {
  std::string availability = "item";
  std::string preemption = "on";
  std::string initiation = "flexible";

  void attach(CLI::App* cmd) {
    cmd->add_option("--availability", availability, "item|batch")
        ->check(CLI::IsMember({"item", "batch"}));
    cmd->add_option("--preemption", preemption, "on|off")
        ->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--initiation", initiation, "flexible|complete")
        ->check(CLI::IsMember({"flexible", "complete"}));
  }

  sbatch::VariationConfig value() const {
    sbatch::VariationConfig var;
    var.availability = availability == "batch" ? sbatch::Availability::Batch
                                               : sbatch::Availability::Item;
    var.preemption = preemption == "off" ? sbatch::Preemption::Forbidden
                                         : sbatch::Preemption::Allowed;
    var.initiation = initiation == "complete" ? sbatch::Initiation::Complete
                                              : sbatch::Initiation::Flexible;
    return var;
  }
};

// config token: model[:flag...] with flags sb, sbt, batch, complete,
// forbidden, bc (= batch+complete), e.g. "ia", "h:sb", "g:sbt:bc"
sbatch::BenchConfig parse_bench_config(const std::string& token,
                                       std::chrono::milliseconds budget,
                                       int workers) {
  sbatch::BenchConfig out;
  out.name = token;
  out.solver.time_limit = budget;
  out.solver.workers = workers;
  std::istringstream in(token);
  std::string part;
  bool first = true;
  while (std::getline(in, part, ':')) {
    if (first) {
      if (part == "ia") out.solver.model = sbatch::ModelVariant::IA;
      else if (part == "g") out.solver.model = sbatch::ModelVariant::G;
      else if (part == "h") out.solver.model = sbatch::ModelVariant::H;
      else throw UserError("unknown model in config " + token);
      first = false;
      continue;
    }
    if (part == "sb") out.solver.sb = true;
    else if (part == "sbt") out.solver.sbt = true;
    else if (part == "batch")
      out.solver.variation.availability = sbatch::Availability::Batch;
    else if (part == "forbidden")
      out.solver.variation.preemption = sbatch::Preemption::Forbidden;
    else if (part == "complete")
      out.solver.variation.initiation = sbatch::Initiation::Complete;
    else if (part == "bc")
      out.solver.variation = sbatch::variation_bc();
    else
      throw UserError("unknown flag '" + part + "' in config " + token);
  }
  if (first) throw UserError("empty config token");
  return out;
}

int default_workers() {
  if (const char* env = std::getenv("SBS_WORKERS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"s-batch scheduling toolkit"};
  app.require_subcommand(1);

  // --- gen ---
  auto* gen = app.add_subcommand("gen", "generate instances");
  int gen_jobs = 15, gen_families = 2, gen_machines = 2, gen_per_class = 3;
  long long gen_scale = 20;
  std::uint64_t gen_seed = 0;
  std::string gen_out = "-";
  std::string gen_budget = "2s";
  bool gen_suite_flag = false;
  gen->add_option("--jobs", gen_jobs);
  gen->add_option("--families", gen_families);
  gen->add_option("--machines", gen_machines);
  gen->add_option("--scale", gen_scale);
  gen->add_option("--seed", gen_seed);
  gen->add_option("--per-class", gen_per_class);
  gen->add_option("--core-budget", gen_budget, "Core solve budget, e.g. 2s");
  gen->add_option("-o,--out", gen_out, "output file, or directory with --suite");
  gen->add_flag("--suite", gen_suite_flag, "generate the 13-class grid");

  // --- solve ---
  auto* solve_cmd = app.add_subcommand("solve", "branch-and-bound solve");
  std::string solve_path, solve_model = "ia", solve_limit = "60s",
              solve_out = "-";
  VariationFlags solve_var;
  bool solve_sb = false, solve_sbt = false, solve_no_sizing = false;
  std::uint64_t solve_seed = 0;
  int solve_workers = default_workers();
  solve_cmd->add_option("instance", solve_path)->required();
  solve_cmd->add_option("--model", solve_model, "ia|g|h")
      ->check(CLI::IsMember({"ia", "g", "h"}));
  solve_var.attach(solve_cmd);
  solve_cmd->add_flag("--sb", solve_sb, "machine symmetry breaking");
  solve_cmd->add_flag("--sbt", solve_sbt, "intra-batch order fixing (B.C only)");
  solve_cmd->add_option("--time-limit", solve_limit);
  solve_cmd->add_option("--seed", solve_seed);
  solve_cmd->add_option("--workers", solve_workers);
  solve_cmd->add_flag("--no-sizing", solve_no_sizing,
                      "Core mode: ignore batch size bounds");
  solve_cmd->add_option("-o,--out", solve_out);
  std::string solve_schedule_out;
  solve_cmd->add_option("--schedule-out", solve_schedule_out,
                        "also write the schedule JSON on its own");

  // --- oracle ---
  auto* oracle_cmd = app.add_subcommand("oracle", "exhaustive optimum");
  std::string oracle_path, oracle_out = "-";
  VariationFlags oracle_var;
  bool oracle_no_sizing = false;
  int oracle_cap = 8;
  oracle_cmd->add_option("instance", oracle_path)->required();
  oracle_var.attach(oracle_cmd);
  oracle_cmd->add_flag("--no-sizing", oracle_no_sizing);
  oracle_cmd->add_option("--cap", oracle_cap, "job-count cap");
  oracle_cmd->add_option("-o,--out", oracle_out);

  // --- encode ---
  auto* encode_cmd = app.add_subcommand("encode", "write a MIP as LP text");
  std::string encode_path, encode_form = "rp", encode_out = "-";
  std::string encode_translate, encode_assignment_out;
  long long encode_big_k = 0;
  encode_cmd->add_option("instance", encode_path)->required();
  encode_cmd->add_option("--formulation", encode_form, "rp|pa")
      ->check(CLI::IsMember({"rp", "pa"}));
  encode_cmd->add_option("--big-k", encode_big_k, "override the big-K constant");
  encode_cmd->add_option("-o,--out", encode_out);
  encode_cmd->add_option("--translate", encode_translate,
                         "schedule JSON to translate into an assignment");
  encode_cmd->add_option("--assignment-out", encode_assignment_out,
                         "where the translated assignment goes");

  // --- check ---
  auto* check_cmd = app.add_subcommand("check", "verify an LP assignment");
  std::string check_lp, check_assign, check_out = "-";
  check_cmd->add_option("model", check_lp, "LP file")->required();
  check_cmd->add_option("assignment", check_assign, "JSON name->value map")
      ->required();
  check_cmd->add_option("-o,--out", check_out);

  // --- bench ---
  auto* bench_cmd = app.add_subcommand("bench", "run a config matrix");
  std::string bench_dir, bench_budget = "60s", bench_out = "-";
  std::vector<std::string> bench_configs;
  int bench_workers = default_workers();
  bench_cmd->add_option("suite", bench_dir, "directory of instance JSON files")
      ->required();
  bench_cmd->add_option("--config", bench_configs,
                        "model[:flag...], repeatable; first is the baseline")
      ->required();
  bench_cmd->add_option("--budget", bench_budget);
  bench_cmd->add_option("--workers", bench_workers);
  bench_cmd->add_option("-o,--out", bench_out);

  // --- gantt ---
  auto* gantt_cmd = app.add_subcommand("gantt", "render a schedule as SVG");
  std::string gantt_inst, gantt_sched, gantt_out = "-";
  gantt_cmd->add_option("instance", gantt_inst)->required();
  gantt_cmd->add_option("schedule", gantt_sched)->required();
  gantt_cmd->add_option("-o,--out", gantt_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return 64;
  }

  try {
    if (*gen) {
      const auto budget = parse_duration(gen_budget);
      if (gen_suite_flag) {
        if (gen_out.empty() || gen_out == "-")
          throw UserError("--suite needs -o <directory>");
        fs::create_directories(gen_out);
        const auto suite = sbatch::gen_suite(sbatch::paper_grid(),
                                             {20, 50, 100}, gen_per_class,
                                             gen_seed, budget);
        for (const auto& entry : suite)
          spit((fs::path(gen_out) / entry.file).string(),
               sbatch::instance_to_json(entry.instance).dump(2) + "\n");
        spit((fs::path(gen_out) / "manifest.json").string(),
             sbatch::suite_manifest(suite, gen_seed).dump(2) + "\n");
        std::cout << suite.size() << " instances written to " << gen_out
                  << "\n";
      } else {
        sbatch::GenSpec spec{gen_jobs, gen_families, gen_machines, gen_scale,
                             gen_seed};
        sbatch::Rng rng = sbatch::Rng::stream(gen_seed, 0);
        sbatch::Instance inst = sbatch::gen_instance(spec, rng);
        inst.bounds = sbatch::derive_min_batch_sizes(inst, rng, budget);
        emit(gen_out, sbatch::instance_to_json(inst).dump(2) + "\n");
      }
      return 0;
    }

    if (*solve_cmd) {
      const sbatch::Instance inst = load_instance(solve_path);
      sbatch::SolverConfig cfg;
      cfg.model = solve_model == "g"   ? sbatch::ModelVariant::G
                  : solve_model == "h" ? sbatch::ModelVariant::H
                                       : sbatch::ModelVariant::IA;
      cfg.variation = solve_var.value();
      cfg.sizing_enabled = !solve_no_sizing;
      cfg.sb = solve_sb;
      cfg.sbt = solve_sbt;
      cfg.time_limit = parse_duration(solve_limit);
      cfg.seed = solve_seed;
      cfg.workers = solve_workers;
      sbatch::SolveResult result;
      try {
        result = sbatch::solve(inst, cfg);
      } catch (const std::invalid_argument& e) {
        throw UserError(e.what());
      }
      emit(solve_out, sbatch::solve_result_to_json(result).dump(2) + "\n");
      if (!solve_schedule_out.empty() && result.schedule)
        spit(solve_schedule_out,
             sbatch::schedule_to_json(*result.schedule).dump(2) + "\n");
      return result.status == sbatch::SolveStatus::Infeasible ? 1 : 0;
    }

    if (*oracle_cmd) {
      const sbatch::Instance inst = load_instance(oracle_path);
      std::optional<sbatch::OracleResult> best;
      try {
        best = sbatch::enumerate_optimal(inst, oracle_var.value(),
                                         !oracle_no_sizing, oracle_cap);
      } catch (const sbatch::CapExceeded& e) {
        throw UserError(e.what());
      }
      json out;
      if (best) {
        out["objective"] = best->objective;
        out["schedule"] = sbatch::schedule_to_json(best->schedule);
      } else {
        out["objective"] = nullptr;
        out["schedule"] = nullptr;
      }
      emit(oracle_out, out.dump(2) + "\n");
      return best ? 0 : 1;
    }

    if (*encode_cmd) {
      const sbatch::Instance inst = load_instance(encode_path);
      const sbatch::Time K =
          encode_big_k > 0 ? encode_big_k : sbatch::default_big_k(inst);
      const sbatch::MilpModel model = encode_form == "pa"
                                          ? sbatch::encode_pa(inst, K)
                                          : sbatch::encode_rp(inst, K);
      emit(encode_out, sbatch::write_lp(model));
      if (!encode_translate.empty()) {
        sbatch::Schedule sched;
        try {
          sched = sbatch::schedule_from_json(
              inst, json::parse(slurp(encode_translate)));
        } catch (const json::exception& e) {
          throw UserError(std::string("bad schedule: ") + e.what());
        }
        const sbatch::MilpAssignment a =
            encode_form == "pa"
                ? sbatch::schedule_to_pa_assignment(inst, sched)
                : sbatch::schedule_to_rp_assignment(inst, sched, K);
        json out = json::object();
        for (const auto& [name, value] : a)
          out[sbatch::sanitize_name(name)] = value;
        emit(encode_assignment_out.empty() ? "-" : encode_assignment_out,
             out.dump(2) + "\n");
      }
      return 0;
    }

    if (*check_cmd) {
      const sbatch::MilpModel model = sbatch::read_lp(slurp(check_lp));
      sbatch::MilpAssignment assignment;
      try {
        const json parsed = json::parse(slurp(check_assign));
        for (const auto& [name, value] : parsed.items())
          assignment[name] = value.get<sbatch::Time>();
      } catch (const json::exception& e) {
        throw UserError(std::string("bad assignment: ") + e.what());
      }
      sbatch::CheckResult verdict;
      try {
        verdict = sbatch::check_assignment(model, assignment);
      } catch (const sbatch::MissingVariable& e) {
        throw UserError(e.what());
      }
      json out = {{"feasible", verdict.feasible},
                  {"objective", verdict.objective},
                  {"violated", verdict.violated}};
      emit(check_out, out.dump(2) + "\n");
      return verdict.feasible ? 0 : 1;
    }

    if (*bench_cmd) {
      const auto budget = parse_duration(bench_budget);
      std::vector<sbatch::BenchConfig> configs;
      for (const std::string& token : bench_configs)
        configs.push_back(parse_bench_config(token, budget, 1));
      std::vector<sbatch::BenchInstance> suite;
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(bench_dir))
        if (entry.path().extension() == ".json" &&
            entry.path().filename() != "manifest.json")
          files.push_back(entry.path());
      std::sort(files.begin(), files.end());
      for (const fs::path& path : files)
        suite.push_back({path.stem().string(), load_instance(path.string())});
      if (suite.empty()) throw UserError("no instances in " + bench_dir);
      const auto rows = sbatch::run_matrix(suite, configs, bench_workers);
      emit(bench_out, sbatch::render_csv(rows, budget.count()));
      return 0;
    }

    if (*gantt_cmd) {
      const sbatch::Instance inst = load_instance(gantt_inst);
      sbatch::Schedule sched;
      try {
        sched = sbatch::schedule_from_json(inst, json::parse(slurp(gantt_sched)));
      } catch (const json::exception& e) {
        throw UserError(std::string("bad schedule: ") + e.what());
      }
      emit(gantt_out, sbatch::gantt_svg(inst, sched));
      return 0;
    }
  } catch (const UserError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
