#include "qapvdss/vdss.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace qapvdss {

namespace {

// W(u, k) = sum_v F(u, v) * D(loc(v), k); the gain row of u is
// 2 * (W(u, loc(u)) - W(u, k)).
CostMatrix location_weights(const Instance& inst, const Assignment& a) {
  const int n = inst.n();
  CostMatrix placed(n, n);
  for (int v = 0; v < n; ++v) placed.row(v) = inst.distances().row(a.loc_of(v));
  return inst.flows() * placed;
}

void recompute_row(CostMatrix& gains, const Instance& inst, const Assignment& a, int u) {
  const int n = inst.n();
  Eigen::Matrix<Cost, 1, Eigen::Dynamic> w = Eigen::Matrix<Cost, 1, Eigen::Dynamic>::Zero(n);
  for (int v = 0; v < n; ++v) {
    const Cost f = inst.flow(u, v);
    if (f != 0) w += f * inst.distances().row(a.loc_of(v));
  }
  const Cost here = w(a.loc_of(u));
  for (int k = 0; k < n; ++k) gains(u, k) = 2 * (here - w(k));
}

// Gain of moving `facility` from its current location `from` to `target`
// after the moves already in `chain`. With no reuse, `from` is the
// facility's original location and the first-move gain at `from` is zero.
Cost correction_gain(const Instance& inst, const GainTable& table, const MoveChain& chain,
                     int facility, int from, int target) {
  Cost corr = 0;
  for (const ChainMove& m : chain.moves) {
    const Cost f = inst.flow(facility, m.facility);
    if (f == 0) continue;
    corr += f * ((inst.dist(m.to, from) - inst.dist(m.to, target)) -
                 (inst.dist(m.from, from) - inst.dist(m.from, target)));
  }
  return table(facility, target) - table(facility, from) + 2 * corr;
}

class ChainSearch {
 public:
  ChainSearch(const Instance& inst, const Assignment& a, const GainTable& table, int max_depth,
              long& budget, BudgetUnit unit, bool allow_reuse, const VdssHooks* hooks)
      : inst_(inst),
        a_(a),
        table_(table),
        max_depth_(max_depth),
        budget_(budget),
        count_evaluations_(unit == BudgetUnit::evaluations),
        allow_reuse_(allow_reuse),
        hooks_(hooks),
        moved_(inst.n(), 0),
        occupant_(a.fac_at().begin(), a.fac_at().end()) {}

  std::optional<MoveChain> run(int start) {
    home_ = a_.loc_of(start);
    moved_[start] = 1;
    if (extend(start, home_, 0)) return chain_;
    return std::nullopt;
  }

 private:
  struct Term {
    Cost flow;
    const Cost* to_row;
    const Cost* from_row;
  };

  // Tries every move for `facility` (currently at `from`) as move number
  // chain_.size() + 1. Returns true once an improving closed chain is found.
  bool extend(int facility, int from, Cost cumulative) {
    const int n = inst_.n();
    const int depth = static_cast<int>(chain_.size()) + 1;
    const Cost* gain_row = table_.matrix().row(facility).data();
    const Cost* flow_row = inst_.flows().row(facility).data();

    std::vector<Term> terms;
    terms.reserve(chain_.size());
    Cost base = -gain_row[from];
    for (const ChainMove& m : chain_.moves) {
      const Cost f = flow_row[m.facility];
      if (f == 0) continue;
      const Cost* to_row = inst_.distances().row(m.to).data();
      const Cost* from_row = inst_.distances().row(m.from).data();
      base += 2 * f * (to_row[from] - from_row[from]);
      terms.push_back({f, to_row, from_row});
    }

    for (int k = 0; k < n; ++k) {
      const bool closing = k == home_;
      int displaced = -1;
      if (closing) {
        if (depth == 1) continue;
      } else {
        if (k == from || depth >= max_depth_) continue;
        displaced = occupant_[k];
        if (!allow_reuse_ && moved_[displaced]) continue;
      }
      if (budget_ <= 0) {
        exhausted_ = true;
        return false;
      }
      if (count_evaluations_) --budget_;

      Cost g = gain_row[k] + base;
      for (const Term& t : terms) g += 2 * t.flow * (t.from_row[k] - t.to_row[k]);
      if (hooks_ && hooks_->on_evaluate) hooks_->on_evaluate(chain_, facility, k, g);

      const Cost total = cumulative + g;
      if (total <= 0) continue;

      chain_.push(facility, from, k, g);
      if (closing) {
        chain_.closed = true;
        return true;
      }
      if (hooks_ && hooks_->on_extend) hooks_->on_extend(chain_);
      if (!count_evaluations_) --budget_;

      moved_[displaced] += 1;
      occupant_[k] = facility;
      const bool found = extend(displaced, k, total);
      if (found) return true;
      occupant_[k] = displaced;
      moved_[displaced] -= 1;
      chain_.moves.pop_back();
      if (exhausted_) return false;
    }
    return false;
  }

  const Instance& inst_;
  const Assignment& a_;
  const GainTable& table_;
  const int max_depth_;
  long& budget_;
  const bool count_evaluations_;
  const bool allow_reuse_;
  const VdssHooks* hooks_;
  std::vector<int> moved_;
  std::vector<int> occupant_;
  MoveChain chain_;
  int home_ = -1;
  bool exhausted_ = false;
};

}  // namespace

bool MoveChain::contains(int facility) const {
  return std::any_of(moves.begin(), moves.end(),
                     [facility](const ChainMove& m) { return m.facility == facility; });
}

void MoveChain::push(int facility, int from, int to, Cost gain) {
  moves.push_back({facility, from, to, gain, total_gain() + gain});
}

void SearchBudget::validate() const {
  if (depths.empty()) throw std::invalid_argument("at least one search depth is required");
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (depths[i] < 1) throw std::invalid_argument("search depths must be >= 1");
    if (i > 0 && depths[i] <= depths[i - 1]) {
      throw std::invalid_argument("search depths must be strictly increasing");
    }
  }
  if (move_limit < 1) throw std::invalid_argument("move limit must be >= 1");
}

GainTable init_gain_table(const Instance& inst, const Assignment& a) {
  if (a.size() != inst.n()) throw ContractError("assignment size does not match instance");
  const int n = inst.n();
  const CostMatrix w = location_weights(inst, a);
  CostMatrix gains(n, n);
  for (int u = 0; u < n; ++u) {
    gains.row(u) = 2 * (Eigen::Matrix<Cost, 1, Eigen::Dynamic>::Constant(n, w(u, a.loc_of(u))) -
                        w.row(u));
  }
  return GainTable(std::move(gains));
}

Cost chain_gain(const Instance& inst, const GainTable& table, const MoveChain& chain, int facility,
                int target) {
  if (chain.contains(facility)) throw ContractError("facility already moved in this chain");
  if (chain.empty()) return table(facility, target);
  // The facility has not moved, so it still sits where the last move landed.
  return correction_gain(inst, table, chain, facility, chain.moves.back().to, target);
}

std::optional<MoveChain> search_from_node(const Instance& inst, const Assignment& a,
                                          const GainTable& table, int start_facility,
                                          int max_depth, long& budget_counter,
                                          const SearchBudget& config, const VdssHooks* hooks) {
  if (start_facility < 0 || start_facility >= inst.n()) {
    throw ContractError("start facility out of range");
  }
  ChainSearch search(inst, a, table, max_depth, budget_counter, config.unit,
                     config.allow_node_reuse, hooks);
  return search.run(start_facility);
}

Assignment apply_chain(const Assignment& a, const MoveChain& chain) {
  if (!chain.closed) throw ContractError("cannot apply an open move chain");
  std::vector<int> facilities, targets;
  for (const ChainMove& m : chain.moves) {
    facilities.push_back(m.facility);
    targets.push_back(m.to);
  }
  Assignment out = a;
  out.relocate(facilities, targets);
  return out;
}

void update_gain_table(GainTable& table, const Instance& inst, const MoveChain& chain,
                       const Assignment& old_a, const Assignment& new_a) {
  (void)old_a;
  if (chain.empty()) return;
  const int n = inst.n();
  CostMatrix& gains = table.matrix();

  std::vector<char> moved(n, 0);
  for (const ChainMove& m : chain.moves) moved[m.facility] = 1;

  // Per move, D(to, .) - D(from, .) as a row; the correction for an
  // unmoved v at i = loc(v) is 2 * sum_m F(u_m, v) * (diff_m(i) - diff_m(j)).
  const int z = static_cast<int>(chain.size());
  CostMatrix diff(z, n);
  for (int m = 0; m < z; ++m) {
    diff.row(m) = inst.distances().row(chain.moves[m].to) -
                  inst.distances().row(chain.moves[m].from);
  }

  Eigen::Matrix<Cost, 1, Eigen::Dynamic> corr(n);
  for (int v = 0; v < n; ++v) {
    if (moved[v]) continue;
    const int i = new_a.loc_of(v);
    corr.setZero();
    bool any = false;
    for (int m = 0; m < z; ++m) {
      const Cost f = inst.flow(chain.moves[m].facility, v);
      if (f == 0) continue;
      corr += f * diff.row(m);
      any = true;
    }
    if (!any) continue;
    gains.row(v) += 2 * (Eigen::Matrix<Cost, 1, Eigen::Dynamic>::Constant(n, corr(i)) - corr);
  }
  for (int v = 0; v < n; ++v) {
    if (moved[v]) recompute_row(gains, inst, new_a, v);
  }
}

RunRecord vdss_run(const Instance& inst, const Assignment& start, const SearchBudget& budget,
                   const VdssOptions& options) {
  budget.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int n = inst.n();

  RunRecord rec;
  rec.best_assignment = start;
  rec.best_cost = cost(inst, start);
  if (options.record_trace) rec.cost_trace.emplace_back(0, rec.best_cost);
  GainTable table = init_gain_table(inst, start);
  bool improved = true;
  while (improved) {
    improved = false;
    for (int depth : budget.depths) {
      for (int u0 = 0; u0 < n && !improved; ++u0) {
        long counter = budget.move_limit;
        auto chain = search_from_node(inst, rec.best_assignment, table, u0, depth, counter,
                                      budget, options.hooks);
        if (!chain) continue;
        if (options.hooks && options.hooks->on_accept) {
          options.hooks->on_accept(*chain, rec.best_assignment);
        }
        Assignment next = apply_chain(rec.best_assignment, *chain);
        update_gain_table(table, inst, *chain, rec.best_assignment, next);
        rec.best_assignment = std::move(next);
        rec.best_cost -= chain->total_gain();
        ++rec.iterations_used;
        if (options.record_trace) rec.cost_trace.emplace_back(rec.iterations_used, rec.best_cost);
        improved = true;
#ifndef NDEBUG
        if (n <= 40) {
          if (rec.best_cost != cost(inst, rec.best_assignment)) {
            throw std::logic_error("accepted chain gain does not match cost decrease");
          }
          if (!(table == init_gain_table(inst, rec.best_assignment))) {
            throw std::logic_error("gain table out of sync after accepted chain");
          }
        }
#endif
      }
      if (improved) break;
    }
  }

  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

}  // namespace qapvdss
