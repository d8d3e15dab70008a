#pragma once

#include <atomic>
#include <algorithm>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "qapvdss/core.hpp"
#include "qapvdss/rts.hpp"
#include "qapvdss/vdss.hpp"

namespace qapvdss {

enum class Solver { rts, vdss, hybrid };

std::string_view to_string(Solver s);
/// Throws std::invalid_argument for unknown names.
Solver parse_solver(std::string_view name);

/// One RTS run followed by one VDSS run seeded with the RTS best.
struct HybridRecord {
  RunRecord combined;  // best of both phases; wall_time is the sum
  RunRecord rts_phase;
  RunRecord vdss_phase;
  Cost start_cost = 0;
};

/// Random start from `seed`, then RTS (its tenure stream also derived from
/// `seed`), then VDSS.
HybridRecord hybrid_run(const Instance& inst, std::uint64_t seed, const RtsParams& rts_params,
                        const SearchBudget& budget);

/// A single seeded run of any solver. The RTS phase of a hybrid run and a
/// plain RTS run with the same seed are identical.
RunRecord solve_once(const Instance& inst, Solver solver, std::uint64_t seed,
                     const RtsParams& rts_params, const SearchBudget& budget);

struct TttOptions {
  RtsParams rts;
  SearchBudget budget;
  int max_attempts = 1000;
};

struct TttOutcome {
  double time_s = 0.0;  // cumulative over attempts
  int attempts = 0;
  Cost final_cost = 0;  // best cost of the last attempt
  bool reached = false;
};

/// Independent seeded runs (restart model) until one reaches `target`.
/// Attempt k uses derive_seed(seed, k); every attempt is a complete run.
TttOutcome time_to_target(const Instance& inst, Cost target, Solver solver, std::uint64_t seed,
                          const TttOptions& options = {});

/// Sorted run times with P_i = (i - 1/2) / m.
struct TttSeries {
  std::vector<double> times;
  std::vector<double> probabilities;

  std::size_t size() const { return times.size(); }
};

TttSeries ttt_series(std::vector<double> times);

/// Time at probability 0.5, interpolating linearly between bracketing
/// points and clamping to the first/last time outside [P_1, P_m].
double t50(const TttSeries& series);

double improvement_factor(double t50_rts, double t50_hybrid);

/// (tau - b) / b.
double normalized_target(Cost tau, Cost b);

struct PowerLawFit {
  double exponent = 0.0;
  double log_prefactor = 0.0;
};

/// Least-squares line through (log n, log t).
PowerLawFit fit_power_law(const std::vector<double>& sizes, const std::vector<double>& times);

struct ScalingPoint {
  int n = 0;
  double median_rts = 0.0;
  double median_vdss = 0.0;
};

struct ScalingReport {
  std::vector<ScalingPoint> points;
  double rts_exponent = 0.0;
  double vdss_exponent = 0.0;
};

/// Per size: a generated instance and `runs_per_size` hybrid runs; medians
/// of the per-phase wall times and their log-log slopes.
ScalingReport scaling_study(const std::vector<int>& sizes, int runs_per_size, std::uint64_t seed,
                            const RtsParams& rts = {}, const SearchBudget& budget = {});

double median(std::vector<double> values);

/// One row of the run CSV.
struct TttRun {
  std::string instance;
  Solver solver = Solver::rts;
  std::uint64_t seed = 0;
  Cost target = 0;
  int attempts = 0;
  double time_s = 0.0;
  Cost final_cost = 0;

  bool reached() const { return final_cost <= target; }
};

/// `runs` time-to-target measurements per solver. Run r of every solver
/// uses master seed derive_seed(seed, r). Runs execute interleaved across
/// solvers; results are ordered by solver, then run index, independent of
/// the worker count.
std::vector<TttRun> run_ttt_experiment(const Instance& inst, const std::string& instance_name,
                                       const std::vector<Solver>& solvers, Cost target, int runs,
                                       std::uint64_t seed, const TttOptions& options,
                                       int workers = 1);

std::string runs_to_csv(const std::vector<TttRun>& runs);
/// Throws ParseError on a header or field mismatch.
std::vector<TttRun> runs_from_csv(std::string_view text);

/// Two columns "time probability", one point per line.
std::string ttt_plot_data(const TttSeries& series);

/// Published reference values for the benchmark instances.
struct ReferenceInstance {
  std::string_view name;
  Cost best_known;
  Cost improvement_threshold;
  Cost target;
  double reported_factor;
};

std::optional<ReferenceInstance> reference_instance(std::string_view name);

/// Summary statistics of one (instance, target) group of runs.
struct SolverSummary {
  Solver solver = Solver::rts;
  int runs = 0;
  int censored = 0;
  std::optional<double> t50;
  Cost best_found = 0;
};

struct GroupSummary {
  std::string instance;
  Cost target = 0;
  std::vector<SolverSummary> solvers;
  std::optional<double> improvement;
  std::optional<Cost> normalizer;
  std::optional<double> normalized;
  std::optional<ReferenceInstance> reference;
  Cost best_found = 0;
};

/// Groups by (instance, target) in first-seen order. `normalizer`
/// overrides the per-instance default (the reference improvement threshold).
std::vector<GroupSummary> summarize_runs(const std::vector<TttRun>& runs,
                                         std::optional<Cost> normalizer = std::nullopt);

/// Runs jobs 0..count-1 on up to `workers` threads; results land by index.
template <typename Result, typename Fn>
std::vector<Result> parallel_map(int count, int workers, Fn&& fn) {
  std::vector<Result> out(count);
  if (workers <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  const int threads = std::min(workers, count);
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          out[i] = fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace qapvdss
