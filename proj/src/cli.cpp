#include "qapvdss/cli.hpp"

#include <filesystem>
#include <random>

#include "CLI11.hpp"
#include "json.hpp"
#include "qapvdss/experiment.hpp"
#include "qapvdss/io.hpp"

namespace qapvdss::cli {

namespace {

using nlohmann::ordered_json;

struct Resolved {
  std::uint64_t seed;
  bool auto_seed;
};

Resolved resolve_seed(const CliConfig& c) {
  if (c.seed) return {*c.seed, false};
  std::random_device rd;
  return {(static_cast<std::uint64_t>(rd()) << 32) ^ rd(), true};
}

RtsParams rts_params(const CliConfig& c) {
  RtsParams p;
  p.iterations = c.rts_iterations;
  return p;
}

SearchBudget search_budget(const CliConfig& c) {
  SearchBudget b;
  b.depths = c.depths;
  b.move_limit = c.move_limit;
  if (c.budget_unit == "moves") {
    b.unit = BudgetUnit::moves;
  } else if (c.budget_unit == "evaluations") {
    b.unit = BudgetUnit::evaluations;
  } else {
    throw std::invalid_argument("--budget-unit must be moves or evaluations");
  }
  b.validate();
  return b;
}

std::string instance_name(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

Instance load_instance(const std::string& path) { return parse_instance(read_file(path)); }

std::vector<Solver> solvers_of(const CliConfig& c) {
  std::vector<Solver> out;
  for (const auto& s : c.solvers) out.push_back(parse_solver(s));
  if (out.empty()) throw std::invalid_argument("no solver selected");
  return out;
}

// Maps exceptions to exit codes.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kParseError;
  } catch (const std::invalid_argument& e) {
    err << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ContractError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
}

ordered_json group_json(const GroupSummary& g) {
  ordered_json j;
  j["instance"] = g.instance;
  if (g.reference) {
    j["best_known"] = g.reference->best_known;
    j["improvement_threshold"] = g.reference->improvement_threshold;
  }
  j["target"] = g.target;
  if (g.normalizer) {
    j["normalizer"] = *g.normalizer;
    j["normalized_target"] = *g.normalized;
  }
  j["best_found"] = g.best_found;
  ordered_json solvers = ordered_json::object();
  ordered_json timing;
  ordered_json t50s = ordered_json::object();
  for (const auto& s : g.solvers) {
    ordered_json sj;
    sj["runs"] = s.runs;
    sj["censored"] = s.censored;
    sj["best_found"] = s.best_found;
    solvers[std::string(to_string(s.solver))] = sj;
    if (s.t50) t50s[std::string(to_string(s.solver))] = *s.t50;
  }
  j["solvers"] = solvers;
  timing["t50_s"] = t50s;
  if (g.improvement) timing["improvement_factor"] = *g.improvement;
  j["timing"] = timing;
  return j;
}

}  // namespace

int cmd_solve(const CliConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (c.instance_path.empty()) throw std::invalid_argument("solve requires --instance");
    if (c.runs < 1) throw std::invalid_argument("--runs must be >= 1");
    const Instance inst = load_instance(c.instance_path);
    const auto solvers = solvers_of(c);
    if (solvers.size() != 1) throw std::invalid_argument("solve takes exactly one --solver");
    const Solver solver = solvers.front();
    const auto [seed, auto_seed] = resolve_seed(c);
    const RtsParams rts = rts_params(c);
    const SearchBudget budget = search_budget(c);

    std::optional<Assignment> start;
    if (!c.start_path.empty()) {
      Solution s = parse_solution(read_file(c.start_path));
      if (s.n != inst.n()) throw ParseError("start solution size does not match instance");
      start = s.assignment;
    }

    ordered_json summary;
    summary["command"] = "solve";
    summary["instance"] = instance_name(c.instance_path);
    summary["solver"] = to_string(solver);
    summary["seed"] = seed;
    if (auto_seed) summary["seed_auto"] = true;
    ordered_json runs = ordered_json::array();
    std::optional<RunRecord> best;
    std::uint64_t best_seed = seed;
    for (int r = 0; r < c.runs; ++r) {
      const std::uint64_t run_seed = seed + static_cast<std::uint64_t>(r);
      RunRecord rec;
      if (start) {
        RtsParams p = rts;
        p.seed = derive_seed(run_seed, 1);
        switch (solver) {
          case Solver::rts:
            rec = rts_run(inst, *start, p);
            break;
          case Solver::vdss:
            rec = vdss_run(inst, *start, budget);
            break;
          case Solver::hybrid: {
            const RunRecord a = rts_run(inst, *start, p);
            rec = vdss_run(inst, a.best_assignment, budget);
            rec.iterations_used += a.iterations_used;
            rec.wall_time += a.wall_time;
            break;
          }
        }
      } else {
        rec = solve_once(inst, solver, run_seed, rts, budget);
      }
      ordered_json rj;
      rj["seed"] = run_seed;
      rj["cost"] = rec.best_cost;
      rj["iterations"] = rec.iterations_used;
      rj["time_s"] = rec.wall_time;
      runs.push_back(rj);
      if (!best || rec.best_cost < best->best_cost) {
        best = std::move(rec);
        best_seed = run_seed;
      }
    }
    summary["runs"] = runs;
    summary["best_cost"] = best->best_cost;
    summary["best_seed"] = best_seed;
    if (!c.output_path.empty()) {
      write_file(c.output_path, write_solution(inst.n(), best->best_cost, best->best_assignment));
      summary["solution_file"] = c.output_path;
    }
    out << summary.dump(2) << "\n";
    err << "final cost " << best->best_cost << "\n";
    return int{kOk};
  });
}

int cmd_generate(const CliConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (c.output_path.empty()) throw std::invalid_argument("generate requires --output");
    const auto [seed, auto_seed] = resolve_seed(c);
    const Instance inst = generate_instance(c.n, seed, c.max_entry);
    write_file(c.output_path, write_instance(inst));
    GeneratorMetadata meta{c.n, seed, c.max_entry, Rng::kName};
    write_file(c.output_path + ".json", write_generator_metadata(meta));
    ordered_json j;
    j["command"] = "generate";
    j["output"] = c.output_path;
    j["metadata"] = c.output_path + ".json";
    j["n"] = c.n;
    j["seed"] = seed;
    if (auto_seed) j["seed_auto"] = true;
    out << j.dump(2) << "\n";
    return int{kOk};
  });
}

int cmd_ttt(const CliConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (c.instance_path.empty()) throw std::invalid_argument("ttt requires --instance");
    if (!c.target) throw std::invalid_argument("ttt requires --target");
    if (c.runs < 1) throw std::invalid_argument("--runs must be >= 1");
    if (c.format != "json" && c.format != "csv" && c.format != "plot") {
      throw std::invalid_argument("--format must be csv, json or plot");
    }
    const Instance inst = load_instance(c.instance_path);
    const auto solvers = solvers_of(c);
    const auto [seed, auto_seed] = resolve_seed(c);
    TttOptions opts;
    opts.rts = rts_params(c);
    opts.budget = search_budget(c);
    opts.max_attempts = c.max_attempts;

    const std::string name = instance_name(c.instance_path);
    const auto runs =
        run_ttt_experiment(inst, name, solvers, *c.target, c.runs, seed, opts, c.workers);
    const auto groups = summarize_runs(runs, c.normalizer);
    const GroupSummary& g = groups.front();

    ordered_json summary = group_json(g);
    summary["command"] = "ttt";
    summary["seed"] = seed;
    if (auto_seed) summary["seed_auto"] = true;
    summary["runs_per_solver"] = c.runs;

    std::string plots;
    for (Solver s : solvers) {
      std::vector<double> times;
      for (const auto& r : runs) {
        if (r.solver == s && r.reached()) times.push_back(r.time_s);
      }
      if (times.empty()) continue;
      const std::string data = ttt_plot_data(ttt_series(times));
      if (plots.empty()) plots = data;
      if (!c.output_path.empty()) {
        write_file(c.output_path + "." + std::string(to_string(s)) + ".dat", data);
      }
    }
    if (!c.output_path.empty()) {
      write_file(c.output_path + ".csv", runs_to_csv(runs));
      write_file(c.output_path + ".json", summary.dump(2) + "\n");
    }

    if (c.format == "csv") {
      out << runs_to_csv(runs);
    } else if (c.format == "plot") {
      out << plots;
    } else {
      out << summary.dump(2) << "\n";
    }

    int status = kOk;
    for (const auto& s : g.solvers) {
      if (s.censored > 0) {
        err << "warning: " << s.censored << " of " << s.runs << " " << to_string(s.solver)
            << " runs did not reach target " << g.target << " within " << c.max_attempts
            << " attempts; excluded from the time-to-target series\n";
      }
      if (s.censored == s.runs) status = kTargetUnreached;
    }
    return status;
  });
}

int cmd_report(const CliConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (c.inputs.empty()) throw std::invalid_argument("report requires at least one --input");
    std::vector<TttRun> runs;
    for (const auto& path : c.inputs) {
      auto part = runs_from_csv(read_file(path));
      runs.insert(runs.end(), part.begin(), part.end());
    }
    if (runs.empty()) throw std::invalid_argument("no runs in the given inputs");
    const auto groups = summarize_runs(runs, c.normalizer);

    std::string text;
    if (c.format == "csv") {
      text =
          "instance,best_known,improvement_threshold,target,normalized_target,best_found,"
          "improvement_factor\n";
      for (const auto& g : groups) {
        auto opt = [](const auto& v) { return v ? std::to_string(*v) : std::string(); };
        text += g.instance + "," +
                (g.reference ? std::to_string(g.reference->best_known) : "") + "," +
                (g.reference ? std::to_string(g.reference->improvement_threshold) : "") + "," +
                std::to_string(g.target) + "," + opt(g.normalized) + "," +
                std::to_string(g.best_found) + "," + opt(g.improvement) + "\n";
      }
    } else {
      ordered_json j;
      j["command"] = "report";
      j["groups"] = ordered_json::array();
      for (const auto& g : groups) j["groups"].push_back(group_json(g));
      text = j.dump(2) + "\n";
    }
    if (!c.output_path.empty()) write_file(c.output_path, text);
    out << text;
    return int{kOk};
  });
}

int cmd_scaling(const CliConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto [seed, auto_seed] = resolve_seed(c);
    const ScalingReport rep =
        scaling_study(c.sizes, c.runs, seed, rts_params(c), search_budget(c));
    ordered_json j;
    j["command"] = "scaling";
    j["seed"] = seed;
    if (auto_seed) j["seed_auto"] = true;
    j["runs_per_size"] = c.runs;
    ordered_json pts = ordered_json::array();
    for (const auto& p : rep.points) {
      pts.push_back({{"n", p.n}, {"median_rts_s", p.median_rts}, {"median_vdss_s", p.median_vdss}});
    }
    j["timing"] = {{"points", pts},
                   {"rts_exponent", rep.rts_exponent},
                   {"vdss_exponent", rep.vdss_exponent}};
    const std::string text = j.dump(2) + "\n";
    if (!c.output_path.empty()) write_file(c.output_path, text);
    out << text;
    return int{kOk};
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliConfig c;
  CLI::App app{"QAP solvers: robust tabu search, variable depth sequential search, hybrid"};
  app.set_config("--config", "", "TOML/INI file with option defaults; flags take precedence");
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "Master seed (drawn and recorded if omitted)");
    sub->add_option("--output", c.output_path, "Output path or prefix");
  };
  auto add_solver_opts = [&](CLI::App* sub) {
    sub->add_option("--instance", c.instance_path, "QAPLIB instance file")->required();
    sub->add_option("--solver", c.solvers, "rts, vdss or hybrid (comma list for ttt)")
        ->delimiter(',');
    sub->add_option("--runs", c.runs, "Number of runs");
    sub->add_option("--depths", c.depths, "Search depths, comma list")->delimiter(',');
    sub->add_option("--move-limit", c.move_limit, "Search budget per start node and depth");
    sub->add_option("--budget-unit", c.budget_unit, "What the budget counts: moves or evaluations");
    sub->add_option("--rts-iterations", c.rts_iterations, "Tabu iterations (default N^2)");
    sub->add_option("--workers", c.workers, "Parallel runs")->envname("QAPVDSS_WORKERS");
  };

  auto* solve = app.add_subcommand("solve", "Solve an instance");
  add_common(solve);
  add_solver_opts(solve);
  solve->add_option("--start", c.start_path, "Start permutation in .sln format");

  auto* generate = app.add_subcommand("generate", "Generate a random symmetric instance");
  add_common(generate);
  generate->add_option("--n", c.n, "Problem size")->required();
  generate->add_option("--max-entry", c.max_entry, "Largest matrix entry");

  auto* ttt = app.add_subcommand("ttt", "Time-to-target measurements");
  add_common(ttt);
  add_solver_opts(ttt);
  ttt->add_option("--target", c.target, "Target cost")->required();
  ttt->add_option("--normalizer", c.normalizer, "b(N) for the normalised target");
  ttt->add_option("--max-attempts", c.max_attempts, "Restarts before a run is censored");
  ttt->add_option("--format", c.format, "Stdout format: json, csv or plot");

  auto* report = app.add_subcommand("report", "Summarise run CSV files");
  report->add_option("--input", c.inputs, "Run CSV files")->required();
  report->add_option("--normalizer", c.normalizer, "b(N) for the normalised target");
  report->add_option("--format", c.format, "json or csv");
  report->add_option("--output", c.output_path, "Write the report here as well");

  auto* scaling = app.add_subcommand("scaling", "Fit run time exponents over problem sizes");
  add_common(scaling);
  scaling->add_option("--sizes", c.sizes, "Problem sizes, comma list")->delimiter(',');
  scaling->add_option("--runs", c.runs, "Runs per size");
  scaling->add_option("--depths", c.depths, "Search depths, comma list")->delimiter(',');
  scaling->add_option("--move-limit", c.move_limit, "Search budget per start node and depth");
  scaling->add_option("--budget-unit", c.budget_unit, "What the budget counts: moves or evaluations");
  scaling->add_option("--rts-iterations", c.rts_iterations, "Tabu iterations (default N^2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kConfigError;
  }

  if (solve->parsed()) return cmd_solve(c, out, err);
  if (generate->parsed()) return cmd_generate(c, out, err);
  if (ttt->parsed()) return cmd_ttt(c, out, err);
  if (report->parsed()) return cmd_report(c, out, err);
  return cmd_scaling(c, out, err);
}

}  // namespace qapvdss::cli
