#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qapvdss/core.hpp"

namespace qapvdss {

/// Malformed instance or solution text. The message names the offending
/// matrix position or token.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// QAPLIB layout: N, then the N x N flow matrix, then the N x N distance
/// matrix, all whitespace separated.
Instance parse_instance(std::string_view text);
std::string write_instance(const Instance& inst);

/// QAPLIB .sln layout: "N cost" then the facility -> location permutation,
/// 1-based on disk.
struct Solution {
  int n = 0;
  Cost cost = 0;
  Assignment assignment;
};

Solution parse_solution(std::string_view text);
std::string write_solution(int n, Cost cost, const Assignment& a);

/// Throws ParseError if the recorded cost differs from cost(inst, s.assignment).
void validate_solution(const Instance& inst, const Solution& s);

/// Generator provenance written next to generated instances, since the
/// instance format has no room for comments.
struct GeneratorMetadata {
  int n = 0;
  std::uint64_t seed = 0;
  int max_entry = 99;
  std::string rng_name = Rng::kName;
};

std::string write_generator_metadata(const GeneratorMetadata& meta);
GeneratorMetadata parse_generator_metadata(std::string_view json_text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace qapvdss
