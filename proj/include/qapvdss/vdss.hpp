#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qapvdss/core.hpp"
#include "qapvdss/rts.hpp"

namespace qapvdss {

/// First-move gains: entry (u, k) is the cost reduction from relocating
/// facility u alone to location k, all other facilities left in place.
/// Rows are facilities, columns locations; entry (u, loc(u)) is zero.
class GainTable {
 public:
  GainTable() = default;
  explicit GainTable(CostMatrix gains) : gains_(std::move(gains)) {}

  Cost operator()(int facility, int location) const { return gains_(facility, location); }
  const CostMatrix& matrix() const { return gains_; }
  CostMatrix& matrix() { return gains_; }
  int size() const { return static_cast<int>(gains_.rows()); }

  bool operator==(const GainTable& other) const { return gains_ == other.gains_; }

 private:
  CostMatrix gains_;
};

/// One relocation inside a sequential chain.
struct ChainMove {
  int facility = -1;
  int from = -1;  // location the facility leaves
  int to = -1;    // location it enters, displacing that location's occupant
  Cost gain = 0;
  Cost cumulative = 0;

  bool operator==(const ChainMove&) const = default;
};

/// Ejection chain: each move's facility is the one displaced by the
/// previous move (moves[m+1].from == moves[m].to). A closed chain ends by
/// moving into moves[0].from and is a cyclic permutation.
struct MoveChain {
  std::vector<ChainMove> moves;
  bool closed = false;

  bool empty() const { return moves.empty(); }
  std::size_t size() const { return moves.size(); }
  Cost total_gain() const { return moves.empty() ? 0 : moves.back().cumulative; }
  bool contains(int facility) const;

  /// Appends a move, filling in the cumulative gain.
  void push(int facility, int from, int to, Cost gain);

  bool operator==(const MoveChain&) const = default;
};

/// What the per-start-node move limit counts.
enum class BudgetUnit {
  moves,        // moves actually made (positive cumulative gain)
  evaluations,  // every gain evaluation, accepted or not
};

/// Search schedule: maximum depths tried in order, and the work allowed
/// from one start node within one depth pass.
struct SearchBudget {
  std::vector<int> depths{2, 5};
  long move_limit = 100000;
  BudgetUnit unit = BudgetUnit::moves;
  /// Let a facility be moved more than once per chain. Off by default.
  bool allow_node_reuse = false;

  void validate() const;
};

/// Optional observation points, used by tests and diagnostics.
struct VdssHooks {
  /// Every gain evaluation: chain before the move, facility, target, gain.
  std::function<void(const MoveChain&, int, int, Cost)> on_evaluate;
  /// Every non-closing prefix retained by the search.
  std::function<void(const MoveChain&)> on_extend;
  /// Every accepted closed chain, with the assignment before it was applied.
  std::function<void(const MoveChain&, const Assignment&)> on_accept;
};

struct VdssOptions {
  bool record_trace = false;
  const VdssHooks* hooks = nullptr;
};

GainTable init_gain_table(const Instance& inst, const Assignment& a);

/// Incremental gain of moving `facility` to `target` as the next move of
/// `chain`, computed from the first-move gains plus one correction term per
/// earlier move. Throws ContractError if `facility` already moved.
Cost chain_gain(const Instance& inst, const GainTable& table, const MoveChain& chain, int facility,
                int target);

/// Depth-first chain search rooted at `start_facility`. Returns the first
/// closed chain with positive total gain, or nothing. Work is charged to
/// `budget_counter` in the unit chosen by `config` (whose depths and limit
/// are not used here); the search gives up when it reaches zero.
std::optional<MoveChain> search_from_node(const Instance& inst, const Assignment& a,
                                          const GainTable& table, int start_facility,
                                          int max_depth, long& budget_counter,
                                          const SearchBudget& config = {},
                                          const VdssHooks* hooks = nullptr);

Assignment apply_chain(const Assignment& a, const MoveChain& chain);

/// Refreshes `table` after `chain` turned `old_a` into `new_a`.
void update_gain_table(GainTable& table, const Instance& inst, const MoveChain& chain,
                       const Assignment& old_a, const Assignment& new_a);

/// Multi-depth driver. Restarts at the shallowest depth after every
/// improvement; stops after a full pass without one.
RunRecord vdss_run(const Instance& inst, const Assignment& start, const SearchBudget& budget,
                   const VdssOptions& options = {});

}  // namespace qapvdss
