#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qapvdss/core.hpp"

namespace qapvdss {

/// Best-so-far record shared by every solver.
struct RunRecord {
  Assignment best_assignment;
  Cost best_cost = 0;
  long iterations_used = 0;
  double wall_time = 0.0;  // seconds
  /// (iteration, best cost) each time the best improves; empty unless requested.
  std::vector<std::pair<long, Cost>> cost_trace;
};

/// Robust tabu search settings. Unset values resolve against the instance
/// size: N^2 iterations, tenure in [0.9N, 1.1N], aspiration horizon 2N^2.
struct RtsParams {
  std::optional<long> iterations;
  double tabu_min_factor = 0.9;
  double tabu_max_factor = 1.1;
  std::optional<long> aspiration;
  std::uint64_t seed = 0;
  bool record_trace = false;

  long resolved_iterations(int n) const { return iterations.value_or(static_cast<long>(n) * n); }
  long resolved_aspiration(int n) const { return aspiration.value_or(2L * n * n); }
  /// Inclusive tenure bounds, at least 1.
  std::pair<long, long> tenure_bounds(int n) const;
  /// Throws std::invalid_argument on out-of-range settings.
  void validate() const;
};

/// delta(i, j) = cost change from exchanging the facilities at locations i and j.
class SwapDeltaTable {
 public:
  SwapDeltaTable() = default;
  explicit SwapDeltaTable(CostMatrix delta) : delta_(std::move(delta)) {}

  Cost operator()(int i, int j) const { return delta_(i, j); }
  const CostMatrix& matrix() const { return delta_; }
  CostMatrix& matrix() { return delta_; }

  bool operator==(const SwapDeltaTable& other) const { return delta_ == other.delta_; }

 private:
  CostMatrix delta_;
};

/// O(N) cost change of swapping the facilities at locations i and j.
Cost swap_delta(const Instance& inst, const Assignment& a, int i, int j);

SwapDeltaTable init_delta_table(const Instance& inst, const Assignment& a);

/// Brings `table` up to date after locations r and s were swapped.
/// `after` is the assignment with the swap already applied. Entries not
/// touching r or s are corrected in O(1); the rest are recomputed.
void update_delta_after_swap(SwapDeltaTable& table, const Instance& inst, const Assignment& after,
                             int r, int s);

/// Robust tabu search over the swap neighbourhood starting from `start`.
RunRecord rts_run(const Instance& inst, const Assignment& start, const RtsParams& params);

}  // namespace qapvdss
