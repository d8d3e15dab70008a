// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <sys/wait.h>

#include "json.hpp"
#include "oracles.hpp"
#include "qapvdss/experiment.hpp"
#include "qapvdss/io.hpp"

using namespace qapvdss;

namespace {

constexpr std::uint64_t kSeed = 0x5EED2026;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Instance tai60a() { return parse_instance(read_file(std::string(QAPVDSS_DATA_DIR) + "/tai60a.dat")); }

// 1: chain gains against the relocation oracle, both along random chains
// built through the public API and for every evaluation the search makes.
Verdict gain_oracle() {
  Rng pick(derive_seed(kSeed, 1));
  long api_steps = 0, search_steps = 0, failures = 0;
  for (int t = 0; api_steps < 10000; ++t) {
    const int n = static_cast<int>(pick.uniform(5, 12));
    const Instance inst = generate_instance(n, derive_seed(kSeed + 1, t));
    const Assignment a = random_assignment(n, derive_seed(kSeed + 2, t));
    const GainTable table = init_gain_table(inst, a);
    MoveChain chain;
    int facility = static_cast<int>(pick.uniform(0, n - 1));
    const int home = a.loc_of(facility);
    int from = home;
    std::vector<char> moved(n, 0);
    moved[facility] = 1;
    for (int depth = 0; depth < n; ++depth) {
      std::vector<int> targets;
      for (int k = 0; k < n; ++k) {
        if (k == from) continue;
        if (k == home ? depth > 0 : !moved[a.fac_at(k)]) targets.push_back(k);
      }
      if (targets.empty()) break;
      const std::vector<int> state = oracle::chain_state(a, chain);
      for (int k : targets) {
        ++api_steps;
        if (chain_gain(inst, table, chain, facility, k) !=
            oracle::relocation_gain(inst, state, facility, k)) {
          ++failures;
        }
      }
      const int k = targets[pick.uniform(0, static_cast<std::int64_t>(targets.size()) - 1)];
      chain.push(facility, from, k, chain_gain(inst, table, chain, facility, k));
      if (k == home) break;
      facility = a.fac_at(k);
      moved[facility] = 1;
      from = k;
    }

    // The search's own incremental evaluations on the same instance.
    VdssHooks hooks;
    Assignment current = a;
    hooks.on_evaluate = [&](const MoveChain& c, int u, int k, Cost g) {
      ++search_steps;
      if (g != oracle::relocation_gain(inst, oracle::chain_state(current, c), u, k)) ++failures;
    };
    hooks.on_accept = [&](const MoveChain& c, const Assignment& before) {
      current = apply_chain(before, c);
    };
    VdssOptions opts;
    opts.hooks = &hooks;
    vdss_run(inst, a, SearchBudget{}, opts);
  }
  return {failures == 0 && api_steps >= 10000,
          fmt("%ld api steps, %ld search evaluations, %ld mismatches", api_steps, search_steps,
              failures)};
}

// 2: incremental table update after every accepted chain, driven with the
// same schedule as the solver.
Verdict table_update() {
  long accepted = 0, mismatches = 0;
  for (int t = 0; accepted < 200 || t < 10; ++t) {
    const int n = 10 + (t * 7) % 41;
    const Instance inst = generate_instance(n, derive_seed(kSeed + 3, t));
    Assignment a = random_assignment(n, derive_seed(kSeed + 4, t));
    GainTable table = init_gain_table(inst, a);
    const SearchBudget budget;
    bool improved = true;
    while (improved) {
      improved = false;
      for (int depth : budget.depths) {
        for (int u = 0; u < n && !improved; ++u) {
          long counter = budget.move_limit;
          const auto chain = search_from_node(inst, a, table, u, depth, counter, budget);
          if (!chain) continue;
          const Assignment next = apply_chain(a, *chain);
          update_gain_table(table, inst, *chain, a, next);
          if (!(table == init_gain_table(inst, next))) ++mismatches;
          a = next;
          ++accepted;
          improved = true;
        }
        if (improved) break;
      }
    }
  }
  return {mismatches == 0 && accepted >= 200,
          fmt("%ld accepted chains at N in [10,50], %ld mismatching tables", accepted, mismatches)};
}

// 3: structural invariants over fuzzed solver runs.
Verdict structure() {
  long prefixes = 0, accepted = 0, violations = 0;
  for (int t = 0; t < 60; ++t) {
    const int n = 5 + t % 46;
    const Instance inst = generate_instance(n, derive_seed(kSeed + 5, t));
    const Assignment start = random_assignment(n, derive_seed(kSeed + 6, t));
    VdssHooks hooks;
    hooks.on_evaluate = [&](const MoveChain& c, int u, int, Cost) {
      if (c.contains(u)) ++violations;
    };
    hooks.on_extend = [&](const MoveChain& c) {
      ++prefixes;
      std::set<int> seen;
      for (std::size_t m = 0; m < c.size(); ++m) {
        if (c.moves[m].cumulative <= 0) ++violations;
        if (!seen.insert(c.moves[m].facility).second) ++violations;
        if (m > 0 && c.moves[m].from != c.moves[m - 1].to) ++violations;
      }
    };
    hooks.on_accept = [&](const MoveChain& c, const Assignment& before) {
      ++accepted;
      std::set<int> seen;
      for (const auto& m : c.moves) {
        if (m.cumulative <= 0 || !seen.insert(m.facility).second) ++violations;
      }
      if (!c.closed || c.moves.back().to != c.moves.front().from) ++violations;
      const Assignment next = apply_chain(before, c);
      if (!next.is_consistent()) ++violations;
      if (oracle::brute_cost(inst, before) - oracle::brute_cost(inst, next) != c.total_gain()) {
        ++violations;
      }
    };
    VdssOptions opts;
    opts.hooks = &hooks;
    const RunRecord rec = vdss_run(inst, start, SearchBudget{}, opts);
    if (!rec.best_assignment.is_consistent() ||
        rec.best_cost != oracle::brute_cost(inst, rec.best_assignment)) {
      ++violations;
    }
    const HybridRecord h = hybrid_run(inst, derive_seed(kSeed + 7, t), RtsParams{}, SearchBudget{});
    if (!h.combined.best_assignment.is_consistent() ||
        h.combined.best_cost != oracle::brute_cost(inst, h.combined.best_assignment) ||
        h.combined.best_cost > h.rts_phase.best_cost) {
      ++violations;
    }
  }
  return {violations == 0,
          fmt("%ld retained prefixes, %ld accepted chains, %ld violations", prefixes, accepted,
              violations)};
}

MoveChain chain_from_path(const std::vector<int>& fac_at, const std::vector<int>& path) {
  const Assignment a = Assignment::from_fac_at(fac_at);
  MoveChain c;
  for (std::size_t m = 0; m < path.size(); ++m) {
    c.push(path[m], a.loc_of(path[m]), a.loc_of(path[(m + 1) % path.size()]), 0);
  }
  c.closed = true;
  return c;
}

// 4: single-chain reachability from 2,3,1,5,6,4 (one-based).
Verdict reachability() {
  const std::vector<int> start{1, 2, 0, 4, 5, 3};
  const std::vector<int> identity{0, 1, 2, 3, 4, 5};
  long chains = 0, disagreements = 0, hits = 0;
  for (int u = 0; u < 6; ++u) {
    oracle::enumerate_closed_chains(start, u, [&](const std::vector<int>& path) {
      ++chains;
      const auto next = oracle::apply_cycle(start, path);
      const Assignment lib = apply_chain(Assignment::from_fac_at(start), chain_from_path(start, path));
      if (std::vector<int>(lib.fac_at().begin(), lib.fac_at().end()) != next) ++disagreements;
      if (next == identity) ++hits;
    });
  }
  bool two = false;
  for (int u = 0; u < 6 && !two; ++u) {
    oracle::enumerate_closed_chains(start, u, [&](const std::vector<int>& first) {
      if (two || first.size() != 3) return;
      const auto mid = oracle::apply_cycle(start, first);
      for (int v = 0; v < 6 && !two; ++v) {
        oracle::enumerate_closed_chains(mid, v, [&](const std::vector<int>& second) {
          if (second.size() == 3 && oracle::apply_cycle(mid, second) == identity) two = true;
        });
      }
    });
  }
  return {chains == 6 * 325 && hits == 0 && disagreements == 0 && two,
          fmt("%ld closed chains enumerated, %ld reach the identity, two 3-cycles %s", chains,
              hits, two ? "do" : "do not")};
}

// 5: brute-force optimum on N=6.
Verdict small_optimality() {
  int hybrid_hits = 0, rts_hits = 0;
  for (int t = 0; t < 100; ++t) {
    const Instance inst = generate_instance(6, derive_seed(kSeed + 8, t));
    const Cost best = oracle::optimum_by_enumeration(inst);
    const std::uint64_t seed = derive_seed(kSeed + 9, t);
    if (hybrid_run(inst, seed, RtsParams{}, SearchBudget{}).combined.best_cost == best) {
      ++hybrid_hits;
    }
    if (solve_once(inst, Solver::rts, seed, RtsParams{}, SearchBudget{}).best_cost == best) {
      ++rts_hits;
    }
  }
  return {hybrid_hits >= 90 && rts_hits >= 80,
          fmt("hybrid %d/100 (need 90), rts %d/100 (need 80)", hybrid_hits, rts_hits)};
}

// 6: single hybrid runs on Tai60a against the improvement threshold.
Verdict tai60a_attainment(const Instance& inst) {
  const auto ref = *reference_instance("tai60a");
  int under_threshold = 0, under_target = 0;
  Cost best = std::numeric_limits<Cost>::max();
  double slowest = 0.0;
  for (int r = 0; r < 20; ++r) {
    const HybridRecord h = hybrid_run(inst, derive_seed(kSeed + 10, r), RtsParams{}, SearchBudget{});
    best = std::min(best, h.combined.best_cost);
    slowest = std::max(slowest, h.combined.wall_time);
    if (h.combined.best_cost <= ref.improvement_threshold) ++under_threshold;
    if (h.combined.best_cost <= ref.target) ++under_target;
  }
  const double p = under_threshold / 20.0;
  return {p >= 0.5 && slowest <= 600.0,
          fmt("%d/20 runs <= %lld (p=%.2f, need 0.5); %d/20 <= target %lld; best %lld; slowest "
              "run %.2f s",
              under_threshold, static_cast<long long>(ref.improvement_threshold), p, under_target,
              static_cast<long long>(ref.target), static_cast<long long>(best), slowest)};
}

// 7: improvement factor at a conservative target.
Verdict dominance(const Instance& inst) {
  TttOptions opts;
  const auto runs =
      run_ttt_experiment(inst, "tai60a", {Solver::rts, Solver::hybrid}, 7400000, 30,
                         derive_seed(kSeed, 11), opts, 1);
  const GroupSummary g = summarize_runs(runs).front();
  std::string per;
  for (const auto& s : g.solvers) {
    per += fmt(" %s t50=%.4f s censored=%d;", std::string(to_string(s.solver)).c_str(),
               s.t50.value_or(-1.0), s.censored);
  }
  const double factor = g.improvement.value_or(0.0);
  return {g.improvement && factor >= 1.0, fmt("I=%.3f (need >= 1.0);%s", factor, per.c_str())};
}

// 8: run-time exponents.
Verdict scaling() {
  const ScalingReport rep = scaling_study({60, 100, 200}, 5, derive_seed(kSeed, 12));
  std::string pts;
  for (const auto& p : rep.points) {
    pts += fmt(" N=%d rts %.3f s vdss %.3f s;", p.n, p.median_rts, p.median_vdss);
  }
  const bool ok = rep.rts_exponent >= 3.5 && rep.rts_exponent <= 4.6 &&
                  rep.vdss_exponent >= 2.8 && rep.vdss_exponent <= 4.1 &&
                  rep.vdss_exponent < rep.rts_exponent;
  return {ok, fmt("x=%.2f in [3.5,4.6], y=%.2f in [2.8,4.1], y<x;%s", rep.rts_exponent,
                  rep.vdss_exponent, pts.c_str())};
}

// 9: TTT formulas.
Verdict ttt_machinery() {
  int bad = 0;
  const TttSeries s = ttt_series({1.0, 3.0});
  if (s.probabilities != std::vector<double>{0.25, 0.75}) ++bad;
  if (t50(s) != 2.0) ++bad;
  if (t50(ttt_series({4.0})) != 4.0) ++bad;
  if (t50(ttt_series({2.0, 9.0, 5.0})) != 5.0) ++bad;
  // P_1 > 0.5 never happens for m >= 2, so clamp checks use a hand-built series.
  TttSeries skew{{1.0, 2.0}, {0.6, 0.9}};
  if (t50(skew) != 1.0) ++bad;
  TttSeries low{{1.0, 2.0}, {0.1, 0.3}};
  if (t50(low) != 2.0) ++bad;
  const TttSeries many = ttt_series({5, 4, 3, 2, 1, 6, 7});
  for (std::size_t i = 0; i < many.size(); ++i) {
    if (many.probabilities[i] != (static_cast<double>(i) + 0.5) / 7.0) ++bad;
  }
  if (improvement_factor(522.0, 200.0) != 2.61) ++bad;
  return {bad == 0, fmt("%d formula mismatches", bad)};
}

std::string shell(const std::string& cmd, int& status) {
  std::string out;
  FILE* pipe = popen((cmd + " 2>/dev/null").c_str(), "r");
  if (!pipe) {
    status = -1;
    return out;
  }
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  const int raw = pclose(pipe);
  status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return out;
}

nlohmann::json without_timing(nlohmann::json j) {
  if (j.is_object()) {
    j.erase("timing");
    j.erase("time_s");
    for (auto& [k, v] : j.items()) v = without_timing(v);
  } else if (j.is_array()) {
    for (auto& v : j) v = without_timing(v);
  }
  return j;
}

std::string csv_without_time(const std::string& csv) {
  auto runs = runs_from_csv(csv);
  for (auto& r : runs) r.time_s = 0.0;
  return runs_to_csv(runs);
}

// 10: identical seeds give identical non-timing output.
Verdict determinism(const Instance& tai) {
  int differences = 0, checks = 0;
  const Instance inst = generate_instance(40, derive_seed(kSeed, 13));
  for (Solver s : {Solver::rts, Solver::vdss, Solver::hybrid}) {
    for (std::uint64_t seed : {1ULL, 99ULL}) {
      const RunRecord a = solve_once(inst, s, seed, RtsParams{}, SearchBudget{});
      const RunRecord b = solve_once(inst, s, seed, RtsParams{}, SearchBudget{});
      ++checks;
      if (!(a.best_assignment == b.best_assignment) || a.best_cost != b.best_cost ||
          a.iterations_used != b.iterations_used) {
        ++differences;
      }
    }
  }
  TttOptions opts;
  const auto target = solve_once(tai, Solver::rts, 5, {}, {}).best_cost + 20000;
  const auto r1 = run_ttt_experiment(tai, "tai60a", {Solver::rts, Solver::hybrid}, target, 4, 77,
                                     opts, 1);
  const auto r2 = run_ttt_experiment(tai, "tai60a", {Solver::rts, Solver::hybrid}, target, 4, 77,
                                     opts, 2);
  ++checks;
  if (csv_without_time(runs_to_csv(r1)) != csv_without_time(runs_to_csv(r2))) ++differences;

#ifdef QAPVDSS_CLI_PATH
  const std::string cli = QAPVDSS_CLI_PATH;
  const std::string data = std::string(QAPVDSS_DATA_DIR) + "/tai60a.dat";
  int st1 = 0, st2 = 0;
  for (const char* solver : {"rts", "vdss", "hybrid"}) {
    const std::string cmd =
        cli + " solve --instance " + data + " --solver " + solver + " --seed 31 --runs 2";
    const std::string a = shell(cmd, st1), b = shell(cmd, st2);
    ++checks;
    if (st1 != 0 || st2 != 0 ||
        without_timing(nlohmann::json::parse(a)).dump() !=
            without_timing(nlohmann::json::parse(b)).dump()) {
      ++differences;
    }
  }
  const std::string ttt = cli + " ttt --instance " + data + " --solver rts,hybrid --runs 3" +
                          " --seed 8 --target " + std::to_string(target);
  const std::string c1 = shell(ttt + " --format csv", st1);
  const std::string c2 = shell(ttt + " --format csv", st2);
  ++checks;
  if (st1 != 0 || st2 != 0 || csv_without_time(c1) != csv_without_time(c2)) ++differences;
  const std::string j1 = shell(ttt + " --format json", st1);
  const std::string j2 = shell(ttt + " --format json", st2);
  ++checks;
  if (st1 != 0 || st2 != 0 ||
      without_timing(nlohmann::json::parse(j1)).dump() !=
          without_timing(nlohmann::json::parse(j2)).dump()) {
    ++differences;
  }
#endif
  return {differences == 0, fmt("%d of %d comparisons differ", differences, checks)};
}

}  // namespace

int main() {
  const Instance tai = tai60a();
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"gain formula matches relocation oracle", gain_oracle},
      {"gain table update matches fresh build", table_update},
      {"pruning and structural invariants", structure},
      {"single-chain reachability", reachability},
      {"small-instance optimality", small_optimality},
      {"tai60a threshold attainment", [&] { return tai60a_attainment(tai); }},
      {"hybrid dominance at 7400000", [&] { return dominance(tai); }},
      {"scaling exponents", scaling},
      {"ttt machinery", ttt_machinery},
      {"determinism", [&] { return determinism(tai); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.pass) ++failed;
    std::printf("[%s] %zu %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
