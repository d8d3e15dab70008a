#include "qapvdss/experiment.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include <Eigen/QR>

#include "qapvdss/io.hpp"

namespace qapvdss {

std::string_view to_string(Solver s) {
  switch (s) {
    case Solver::rts:
      return "rts";
    case Solver::vdss:
      return "vdss";
    case Solver::hybrid:
      return "hybrid";
  }
  return "?";
}

Solver parse_solver(std::string_view name) {
  if (name == "rts") return Solver::rts;
  if (name == "vdss") return Solver::vdss;
  if (name == "hybrid") return Solver::hybrid;
  throw std::invalid_argument("unknown solver '" + std::string(name) + "'");
}

HybridRecord hybrid_run(const Instance& inst, std::uint64_t seed, const RtsParams& rts_params,
                        const SearchBudget& budget) {
  const Assignment start = random_assignment(inst.n(), derive_seed(seed, 0));
  RtsParams rts = rts_params;
  rts.seed = derive_seed(seed, 1);

  HybridRecord rec;
  rec.start_cost = cost(inst, start);
  rec.rts_phase = rts_run(inst, start, rts);
  rec.vdss_phase = vdss_run(inst, rec.rts_phase.best_assignment, budget);

  rec.combined.best_assignment = rec.vdss_phase.best_assignment;
  rec.combined.best_cost = rec.vdss_phase.best_cost;
  rec.combined.iterations_used = rec.rts_phase.iterations_used + rec.vdss_phase.iterations_used;
  rec.combined.wall_time = rec.rts_phase.wall_time + rec.vdss_phase.wall_time;
  return rec;
}

RunRecord solve_once(const Instance& inst, Solver solver, std::uint64_t seed,
                     const RtsParams& rts_params, const SearchBudget& budget) {
  switch (solver) {
    case Solver::hybrid:
      return hybrid_run(inst, seed, rts_params, budget).combined;
    case Solver::rts: {
      RtsParams rts = rts_params;
      rts.seed = derive_seed(seed, 1);
      return rts_run(inst, random_assignment(inst.n(), derive_seed(seed, 0)), rts);
    }
    case Solver::vdss:
      return vdss_run(inst, random_assignment(inst.n(), derive_seed(seed, 0)), budget);
  }
  throw std::logic_error("unreachable");
}

TttOutcome time_to_target(const Instance& inst, Cost target, Solver solver, std::uint64_t seed,
                          const TttOptions& options) {
  if (options.max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
  TttOutcome out;
  for (int k = 0; k < options.max_attempts; ++k) {
    const RunRecord rec =
        solve_once(inst, solver, derive_seed(seed, k), options.rts, options.budget);
    out.time_s += rec.wall_time;
    out.attempts = k + 1;
    out.final_cost = rec.best_cost;
    if (rec.best_cost <= target) {
      out.reached = true;
      break;
    }
  }
  return out;
}

TttSeries ttt_series(std::vector<double> times) {
  if (times.empty()) throw std::invalid_argument("time-to-target series needs at least one time");
  std::sort(times.begin(), times.end());
  TttSeries s;
  const double m = static_cast<double>(times.size());
  s.probabilities.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    s.probabilities.push_back((static_cast<double>(i) + 0.5) / m);
  }
  s.times = std::move(times);
  return s;
}

double t50(const TttSeries& series) {
  if (series.times.empty()) throw std::invalid_argument("empty time-to-target series");
  const auto& p = series.probabilities;
  const auto& t = series.times;
  if (0.5 <= p.front()) return t.front();
  if (0.5 >= p.back()) return t.back();
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    if (p[i] <= 0.5 && 0.5 <= p[i + 1]) {
      const double w = (0.5 - p[i]) / (p[i + 1] - p[i]);
      return t[i] + w * (t[i + 1] - t[i]);
    }
  }
  return t.back();
}

double improvement_factor(double t50_rts, double t50_hybrid) {
  if (!(t50_rts > 0.0) || !(t50_hybrid > 0.0)) {
    throw std::invalid_argument("improvement factor needs positive times");
  }
  return t50_rts / t50_hybrid;
}

double normalized_target(Cost tau, Cost b) {
  if (b <= 0) throw std::invalid_argument("normalizer must be positive");
  return static_cast<double>(tau - b) / static_cast<double>(b);
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  return m % 2 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

PowerLawFit fit_power_law(const std::vector<double>& sizes, const std::vector<double>& times) {
  if (sizes.size() != times.size() || sizes.size() < 2) {
    throw std::invalid_argument("power-law fit needs matching size and time lists");
  }
  Eigen::MatrixXd design(sizes.size(), 2);
  Eigen::VectorXd rhs(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (!(sizes[i] > 0.0) || !(times[i] > 0.0)) {
      throw std::invalid_argument("power-law fit needs positive sizes and times");
    }
    design(i, 0) = std::log(sizes[i]);
    design(i, 1) = 1.0;
    rhs(i) = std::log(times[i]);
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  return {coef(0), coef(1)};
}

ScalingReport scaling_study(const std::vector<int>& sizes, int runs_per_size, std::uint64_t seed,
                            const RtsParams& rts, const SearchBudget& budget) {
  if (sizes.size() < 3) throw std::invalid_argument("scaling study needs at least 3 sizes");
  if (runs_per_size < 1) throw std::invalid_argument("runs per size must be >= 1");
  ScalingReport report;
  std::vector<double> ns, rts_t, vdss_t;
  for (int n : sizes) {
    const Instance inst = generate_instance(n, derive_seed(seed, static_cast<std::uint64_t>(n)));
    std::vector<double> a, b;
    for (int r = 0; r < runs_per_size; ++r) {
      const auto rec = hybrid_run(inst, derive_seed(seed, 1000000ULL * n + r), rts, budget);
      a.push_back(rec.rts_phase.wall_time);
      b.push_back(rec.vdss_phase.wall_time);
    }
    ScalingPoint pt{n, median(a), median(b)};
    report.points.push_back(pt);
    ns.push_back(n);
    rts_t.push_back(pt.median_rts);
    vdss_t.push_back(pt.median_vdss);
  }
  report.rts_exponent = fit_power_law(ns, rts_t).exponent;
  report.vdss_exponent = fit_power_law(ns, vdss_t).exponent;
  return report;
}

std::vector<TttRun> run_ttt_experiment(const Instance& inst, const std::string& instance_name,
                                       const std::vector<Solver>& solvers, Cost target, int runs,
                                       std::uint64_t seed, const TttOptions& options,
                                       int workers) {
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  const int kinds = static_cast<int>(solvers.size());
  // Jobs alternate between solvers so drifts in machine speed hit all of
  // them alike; results are regrouped by solver afterwards.
  const auto interleaved = parallel_map<TttRun>(runs * kinds, workers, [&](int job) {
    const Solver solver = solvers[job % kinds];
    const std::uint64_t run_seed = derive_seed(seed, static_cast<std::uint64_t>(job / kinds));
    const TttOutcome o = time_to_target(inst, target, solver, run_seed, options);
    return TttRun{instance_name, solver, run_seed, target, o.attempts, o.time_s, o.final_cost};
  });
  std::vector<TttRun> out;
  out.reserve(interleaved.size());
  for (int s = 0; s < kinds; ++s) {
    for (int r = 0; r < runs; ++r) out.push_back(interleaved[r * kinds + s]);
  }
  return out;
}

namespace {

constexpr std::string_view kCsvHeader = "instance,solver,seed,target,attempts,time_s,final_cost";

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line_no) {
  T value{};
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || end != field.data() + field.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": bad numeric field '" +
                     std::string(field) + "'");
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

}  // namespace

std::string runs_to_csv(const std::vector<TttRun>& runs) {
  std::string out(kCsvHeader);
  out += '\n';
  char buf[64];
  for (const TttRun& r : runs) {
    std::snprintf(buf, sizeof buf, "%.6f", r.time_s);
    out += r.instance + "," + std::string(to_string(r.solver)) + "," + std::to_string(r.seed) +
           "," + std::to_string(r.target) + "," + std::to_string(r.attempts) + "," + buf + "," +
           std::to_string(r.final_cost) + "\n";
  }
  return out;
}

std::vector<TttRun> runs_from_csv(std::string_view text) {
  std::vector<TttRun> runs;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kCsvHeader) {
        throw ParseError("unexpected CSV header '" + std::string(line) + "', expected '" +
                         std::string(kCsvHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 7) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 7 fields, got " +
                       std::to_string(f.size()));
    }
    TttRun r;
    r.instance = std::string(f[0]);
    try {
      r.solver = parse_solver(f[1]);
    } catch (const std::invalid_argument& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    r.seed = parse_number<std::uint64_t>(f[2], line_no);
    r.target = parse_number<Cost>(f[3], line_no);
    r.attempts = parse_number<int>(f[4], line_no);
    r.time_s = parse_number<double>(f[5], line_no);
    r.final_cost = parse_number<Cost>(f[6], line_no);
    runs.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError("missing CSV header");
  return runs;
}

std::string ttt_plot_data(const TttSeries& series) {
  std::string out;
  char buf[96];
  for (std::size_t i = 0; i < series.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6f %.6f\n", series.times[i], series.probabilities[i]);
    out += buf;
  }
  return out;
}

std::optional<ReferenceInstance> reference_instance(std::string_view name) {
  static constexpr std::array<ReferenceInstance, 5> kTable{{
      {"tai60a", 7205962, 7320000, 7256000, 1.30},
      {"tai80a", 13511780, 13720000, 13620000, 2.52},
      {"tai100a", 21052466, 21360000, 21200000, 3.07},
      {"pau200a", 89282330, 89740000, 89460000, 10.94},
      {"pau400a", 366463098, 367600000, 367060000, 15.15},
  }};
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const auto& r : kTable) {
    if (r.name == lower) return r;
  }
  return std::nullopt;
}

std::vector<GroupSummary> summarize_runs(const std::vector<TttRun>& runs,
                                         std::optional<Cost> normalizer) {
  std::vector<GroupSummary> groups;
  std::map<std::pair<std::string, Cost>, std::size_t> index;
  std::vector<std::map<Solver, std::vector<const TttRun*>>> members;
  for (const TttRun& r : runs) {
    const auto key = std::make_pair(r.instance, r.target);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, groups.size()).first;
      GroupSummary g;
      g.instance = r.instance;
      g.target = r.target;
      g.best_found = r.final_cost;
      groups.push_back(std::move(g));
      members.emplace_back();
    }
    members[it->second][r.solver].push_back(&r);
  }

  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    GroupSummary& g = groups[gi];
    for (const auto& [solver, rs] : members[gi]) {
      SolverSummary s;
      s.solver = solver;
      s.runs = static_cast<int>(rs.size());
      s.best_found = rs.front()->final_cost;
      std::vector<double> times;
      for (const TttRun* r : rs) {
        s.best_found = std::min(s.best_found, r->final_cost);
        if (r->reached()) {
          times.push_back(r->time_s);
        } else {
          ++s.censored;
        }
      }
      if (!times.empty()) s.t50 = t50(ttt_series(std::move(times)));
      g.best_found = std::min(g.best_found, s.best_found);
      g.solvers.push_back(s);
    }
    const SolverSummary* rts = nullptr;
    const SolverSummary* hyb = nullptr;
    for (const auto& s : g.solvers) {
      if (s.solver == Solver::rts) rts = &s;
      if (s.solver == Solver::hybrid) hyb = &s;
    }
    if (rts && hyb && rts->t50 && hyb->t50 && *rts->t50 > 0 && *hyb->t50 > 0) {
      g.improvement = improvement_factor(*rts->t50, *hyb->t50);
    }
    g.reference = reference_instance(g.instance);
    if (normalizer) {
      g.normalizer = normalizer;
    } else if (g.reference) {
      g.normalizer = g.reference->improvement_threshold;
    }
    if (g.normalizer) g.normalized = normalized_target(g.target, *g.normalizer);
  }
  return groups;
}

}  // namespace qapvdss
