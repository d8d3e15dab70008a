#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace qapvdss {

/// Cost, gain and delta values. All objective arithmetic is exact 64-bit.
using Cost = std::int64_t;

/// Dense square matrix, row-major so that row scans in the inner loops are contiguous.
template <typename Scalar>
using SquareMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using CostMatrix = SquareMatrix<Cost>;

/// Raised when a caller breaks an operation's precondition (size mismatch, bad index, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Symmetric QAP instance: flows between facilities, distances between locations.
///
/// Immutable after construction; the constructor verifies symmetry, zero
/// diagonals and that every entry is a non-negative 32-bit value.
class Instance {
 public:
  Instance(CostMatrix flows, CostMatrix distances);

  int n() const { return static_cast<int>(flows_.rows()); }
  Cost flow(int u, int v) const { return flows_(u, v); }
  Cost dist(int i, int j) const { return distances_(i, j); }
  const CostMatrix& flows() const { return flows_; }
  const CostMatrix& distances() const { return distances_; }

  bool operator==(const Instance& other) const {
    return flows_ == other.flows_ && distances_ == other.distances_;
  }

 private:
  CostMatrix flows_;
  CostMatrix distances_;
};

/// Bijection facility <-> location, kept in both directions.
class Assignment {
 public:
  Assignment() = default;

  static Assignment identity(int n);
  /// Throws ContractError unless `fac_at` is a permutation of 0..n-1.
  static Assignment from_fac_at(std::vector<int> fac_at);
  static Assignment from_loc_of(std::vector<int> loc_of);

  int size() const { return static_cast<int>(loc_of_.size()); }
  int loc_of(int facility) const { return loc_of_[facility]; }
  int fac_at(int location) const { return fac_at_[location]; }
  std::span<const int> loc_of() const { return loc_of_; }
  std::span<const int> fac_at() const { return fac_at_; }

  /// Exchanges the facilities sitting at locations i and j.
  void swap_locations(int i, int j);

  /// Places each facility at a new location. The caller guarantees the
  /// result is again a bijection (e.g. a closed move chain).
  void relocate(std::span<const int> facilities, std::span<const int> targets);

  bool is_consistent() const;

  bool operator==(const Assignment& other) const { return fac_at_ == other.fac_at_; }

 private:
  std::vector<int> loc_of_;
  std::vector<int> fac_at_;
};

/// sum_u sum_v F(u,v) * D(loc(u), loc(v)) over ordered facility pairs.
Cost cost(const Instance& inst, const Assignment& a);

/// Same double sum for an arbitrary facility -> location map (holes and
/// double occupancy allowed).
Cost relocation_cost(const Instance& inst, std::span<const int> loc_of);

/// Seed-stable random source: std::mt19937_64 with rejection-sampled bounded
/// draws, so streams do not depend on the standard library's distributions.
class Rng {
 public:
  static constexpr const char* kName = "mt19937_64";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform integer in [lo, hi].
  std::int64_t uniform(std::int64_t lo, std::int64_t hi);

 private:
  std::mt19937_64 engine_;
};

/// Deterministic child seed for stream `index` of `master` (splitmix64 finaliser).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Random symmetric instance with zero diagonals; off-diagonal entries of
/// both matrices uniform on [0, max_entry]. Upper triangles are drawn row
/// by row (flows first) and mirrored.
Instance generate_instance(int n, std::uint64_t seed, int max_entry = 99);

/// Uniform random permutation (Fisher-Yates).
Assignment random_assignment(int n, std::uint64_t seed);

}  // namespace qapvdss
