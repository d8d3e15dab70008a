#include "qapvdss/core.hpp"

#include <limits>
#include <string>
#include <utility>

namespace qapvdss {

namespace {

void check_matrix(const CostMatrix& m, const char* what) {
  constexpr Cost kMax = std::numeric_limits<std::int32_t>::max();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (m(i, i) != 0) {
      throw std::invalid_argument(std::string(what) + " matrix has nonzero diagonal at row " +
                                  std::to_string(i));
    }
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) < 0 || m(i, j) > kMax) {
        throw std::invalid_argument(std::string(what) + " entry (" + std::to_string(i) + "," +
                                    std::to_string(j) + ") outside [0, 2^31)");
      }
      if (m(i, j) != m(j, i)) {
        throw std::invalid_argument(std::string(what) + " matrix is asymmetric at (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
}

bool is_permutation(std::span<const int> p) {
  std::vector<char> seen(p.size(), 0);
  for (int x : p) {
    if (x < 0 || static_cast<std::size_t>(x) >= p.size() || seen[x]) return false;
    seen[x] = 1;
  }
  return true;
}

std::vector<int> inverse(std::span<const int> p) {
  std::vector<int> inv(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) inv[p[i]] = static_cast<int>(i);
  return inv;
}

}  // namespace

Instance::Instance(CostMatrix flows, CostMatrix distances)
    : flows_(std::move(flows)), distances_(std::move(distances)) {
  if (flows_.rows() < 1 || flows_.rows() != flows_.cols() || distances_.rows() != flows_.rows() ||
      distances_.cols() != flows_.rows()) {
    throw std::invalid_argument("flow and distance matrices must be square and of equal size");
  }
  check_matrix(flows_, "flow");
  check_matrix(distances_, "distance");
}

Assignment Assignment::identity(int n) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  return from_fac_at(std::move(p));
}

Assignment Assignment::from_fac_at(std::vector<int> fac_at) {
  if (!is_permutation(fac_at)) throw ContractError("assignment is not a bijection");
  Assignment a;
  a.loc_of_ = inverse(fac_at);
  a.fac_at_ = std::move(fac_at);
  return a;
}

Assignment Assignment::from_loc_of(std::vector<int> loc_of) {
  if (!is_permutation(loc_of)) throw ContractError("assignment is not a bijection");
  Assignment a;
  a.fac_at_ = inverse(loc_of);
  a.loc_of_ = std::move(loc_of);
  return a;
}

void Assignment::swap_locations(int i, int j) {
  const int u = fac_at_[i];
  const int v = fac_at_[j];
  fac_at_[i] = v;
  fac_at_[j] = u;
  loc_of_[u] = j;
  loc_of_[v] = i;
}

void Assignment::relocate(std::span<const int> facilities, std::span<const int> targets) {
  for (std::size_t m = 0; m < facilities.size(); ++m) {
    loc_of_[facilities[m]] = targets[m];
    fac_at_[targets[m]] = facilities[m];
  }
}

bool Assignment::is_consistent() const {
  if (loc_of_.size() != fac_at_.size() || !is_permutation(fac_at_)) return false;
  for (std::size_t i = 0; i < fac_at_.size(); ++i) {
    if (loc_of_[fac_at_[i]] != static_cast<int>(i)) return false;
  }
  return true;
}

Cost relocation_cost(const Instance& inst, std::span<const int> loc_of) {
  const int n = inst.n();
  if (static_cast<int>(loc_of.size()) != n) {
    throw ContractError("facility map size does not match instance size");
  }
  for (int l : loc_of) {
    if (l < 0 || l >= n) throw ContractError("location index out of range");
  }
  Cost total = 0;
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) total += inst.flow(u, v) * inst.dist(loc_of[u], loc_of[v]);
  }
  return total;
}

Cost cost(const Instance& inst, const Assignment& a) {
  if (a.size() != inst.n()) throw ContractError("assignment size does not match instance size");
  return relocation_cost(inst, a.loc_of());
}

std::int64_t Rng::uniform(std::int64_t lo, std::int64_t hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo);
  if (span == std::numeric_limits<std::uint64_t>::max()) return static_cast<std::int64_t>(next());
  const std::uint64_t range = span + 1;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return lo + static_cast<std::int64_t>(x % range);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Instance generate_instance(int n, std::uint64_t seed, int max_entry) {
  if (n < 2) throw std::invalid_argument("instance size must be at least 2");
  if (max_entry < 0) throw std::invalid_argument("max_entry must be non-negative");
  Rng rng(seed);
  auto draw = [&] {
    CostMatrix m = CostMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        m(i, j) = rng.uniform(0, max_entry);
        m(j, i) = m(i, j);
      }
    }
    return m;
  };
  CostMatrix flows = draw();
  CostMatrix distances = draw();
  return Instance(std::move(flows), std::move(distances));
}

Assignment random_assignment(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("assignment size must be at least 1");
  Rng rng(seed);
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  for (int i = n - 1; i > 0; --i) std::swap(p[i], p[rng.uniform(0, i)]);
  return Assignment::from_fac_at(std::move(p));
}

}  // namespace qapvdss
