#include "qapvdss/rts.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qapvdss {

namespace {

constexpr Cost kInfinity = std::numeric_limits<Cost>::max();

// Upper-triangle correction for every pair not touching r or s, then full
// recomputation of rows/columns r and s.
void refresh_after_swap(CostMatrix& delta, const Instance& inst, const Assignment& after, int r,
                        int s, bool mirror) {
  const int n = inst.n();
  const CostMatrix& dist = inst.distances();
  const CostMatrix& flow = inst.flows();
  const int fr = after.fac_at(r);
  const int fs = after.fac_at(s);

  std::vector<Cost> dd(n), ff(n);
  for (int x = 0; x < n; ++x) {
    dd[x] = dist(r, x) - dist(s, x);
    const int fx = after.fac_at(x);
    ff[x] = flow(fr, fx) - flow(fs, fx);
  }

  for (int i = 0; i < n - 1; ++i) {
    if (i == r || i == s) continue;
    Cost* row = delta.row(i).data();
    const Cost di = dd[i];
    const Cost fi = ff[i];
    for (int j = i + 1; j < n; ++j) {
      if (j == r || j == s) continue;
      row[j] += 2 * (di - dd[j]) * (ff[j] - fi);
    }
  }
  if (mirror) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) delta(j, i) = delta(i, j);
    }
  }
  for (int x : {r, s}) {
    for (int k = 0; k < n; ++k) {
      const Cost d = k == x ? 0 : swap_delta(inst, after, x, k);
      delta(x, k) = d;
      delta(k, x) = d;
    }
  }
}

}  // namespace

std::pair<long, long> RtsParams::tenure_bounds(int n) const {
  long lo = static_cast<long>(std::floor(tabu_min_factor * n));
  long hi = static_cast<long>(std::floor(tabu_max_factor * n));
  if (lo < 1) lo = 1;
  if (hi < lo) hi = lo;
  return {lo, hi};
}

void RtsParams::validate() const {
  if (iterations && *iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (!(tabu_min_factor > 0.0) || tabu_min_factor > tabu_max_factor) {
    throw std::invalid_argument("tabu factors must satisfy 0 < min <= max");
  }
  if (aspiration && *aspiration < 1) throw std::invalid_argument("aspiration must be >= 1");
}

Cost swap_delta(const Instance& inst, const Assignment& a, int i, int j) {
  const int n = inst.n();
  if (i < 0 || j < 0 || i >= n || j >= n) throw ContractError("swap location out of range");
  if (i == j) return 0;
  const int fi = a.fac_at(i);
  const int fj = a.fac_at(j);
  const Cost* di = inst.distances().row(i).data();
  const Cost* dj = inst.distances().row(j).data();
  const Cost* flow_i = inst.flows().row(fi).data();
  const Cost* flow_j = inst.flows().row(fj).data();
  Cost d = 0;
  for (int k = 0; k < n; ++k) {
    if (k == i || k == j) continue;
    const int fk = a.fac_at(k);
    d += (di[k] - dj[k]) * (flow_j[fk] - flow_i[fk]);
  }
  return 2 * d;
}

SwapDeltaTable init_delta_table(const Instance& inst, const Assignment& a) {
  const int n = inst.n();
  CostMatrix delta = CostMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      delta(i, j) = swap_delta(inst, a, i, j);
      delta(j, i) = delta(i, j);
    }
  }
  return SwapDeltaTable(std::move(delta));
}

void update_delta_after_swap(SwapDeltaTable& table, const Instance& inst, const Assignment& after,
                             int r, int s) {
  if (r == s) return;
  refresh_after_swap(table.matrix(), inst, after, r, s, /*mirror=*/true);
}

RunRecord rts_run(const Instance& inst, const Assignment& start, const RtsParams& params) {
  params.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int n = inst.n();
  if (start.size() != n) throw ContractError("start assignment size does not match instance");

  const long iterations = params.resolved_iterations(n);
  const long aspiration = params.resolved_aspiration(n);
  const auto [tenure_lo, tenure_hi] = params.tenure_bounds(n);
  Rng rng(params.seed);

  Assignment current = start;
  Cost current_cost = cost(inst, current);

  RunRecord rec;
  rec.best_assignment = current;
  rec.best_cost = current_cost;
  if (params.record_trace) rec.cost_trace.emplace_back(0, current_cost);

  // Only the upper triangle (i < j) is maintained inside the loop.
  CostMatrix delta = init_delta_table(inst, current).matrix();

  // tabu(u, l): iteration until which facility u may not be placed at location l.
  CostMatrix tabu(n, n);
  for (int u = 0; u < n; ++u) {
    for (int l = 0; l < n; ++l) tabu(u, l) = -(static_cast<Cost>(n) * u + l);
  }

  long iter = 1;
  for (; iter <= iterations; ++iter) {
    int best_i = -1, best_j = -1;
    Cost best_delta = kInfinity;
    bool already_aspired = false;
    int fallback_i = -1, fallback_j = -1;
    Cost fallback_expiry = kInfinity;

    for (int i = 0; i < n - 1; ++i) {
      const int ui = current.fac_at(i);
      const Cost* drow = delta.row(i).data();
      const Cost* tabu_ui = tabu.row(ui).data();
      for (int j = i + 1; j < n; ++j) {
        const int uj = current.fac_at(j);
        const Cost t1 = tabu_ui[j];
        const Cost t2 = tabu(uj, i);
        const Cost d = drow[j];
        const bool authorized = t1 < iter || t2 < iter;
        const bool aspired = (t1 < iter - aspiration && t2 < iter - aspiration) ||
                             current_cost + d < rec.best_cost;
        if ((aspired && !already_aspired) || (aspired && already_aspired && d < best_delta) ||
            (!aspired && !already_aspired && authorized && d < best_delta)) {
          best_i = i;
          best_j = j;
          best_delta = d;
          if (aspired) already_aspired = true;
        }
        if (!authorized) {
          const Cost expiry = std::min(t1, t2);
          if (expiry < fallback_expiry) {
            fallback_expiry = expiry;
            fallback_i = i;
            fallback_j = j;
          }
        }
      }
    }
    if (best_i < 0) {
      if (fallback_i < 0) break;  // n == 1
      best_i = fallback_i;
      best_j = fallback_j;
      best_delta = delta(best_i, best_j);
    }

    const int moved_i = current.fac_at(best_i);
    const int moved_j = current.fac_at(best_j);
    current.swap_locations(best_i, best_j);
    current_cost += best_delta;
    tabu(moved_i, best_i) = iter + rng.uniform(tenure_lo, tenure_hi);
    tabu(moved_j, best_j) = iter + rng.uniform(tenure_lo, tenure_hi);

    if (current_cost < rec.best_cost) {
      rec.best_cost = current_cost;
      rec.best_assignment = current;
      if (params.record_trace) rec.cost_trace.emplace_back(iter, current_cost);
    }
    refresh_after_swap(delta, inst, current, best_i, best_j, /*mirror=*/false);

#ifndef NDEBUG
    if (iter % 17 == 0) {
      const int i = static_cast<int>(iter % n);
      const int j = static_cast<int>((iter / n + i + 1) % n);
      if (i != j && delta(std::min(i, j), std::max(i, j)) != swap_delta(inst, current, i, j)) {
        throw std::logic_error("swap delta table out of sync");
      }
    }
#endif
  }

  rec.iterations_used = iter - 1;
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

}  // namespace qapvdss
