#include "qapvdss/io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace qapvdss {

namespace {

class Tokenizer {
 public:
  explicit Tokenizer(std::string_view text) : text_(text) {}

  /// Next integer token, or throws naming `where`.
  std::int64_t next(const std::string& where) {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input while reading " + where);
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view token = text_.substr(start, pos_ - start);
    std::int64_t value = 0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || end != token.data() + token.size()) {
      throw ParseError("invalid integer token '" + std::string(token) + "' while reading " + where);
    }
    return value;
  }

  bool at_end() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return pos_ >= text_.size();
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string position(const char* matrix, int r, int c) {
  return std::string(matrix) + " matrix row " + std::to_string(r) + " column " + std::to_string(c);
}

CostMatrix read_matrix(Tokenizer& tok, int n, const char* name, char symbol) {
  CostMatrix m(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      m(r, c) = tok.next(position(name, r, c));
      if (m(r, c) < 0 || m(r, c) > std::numeric_limits<std::int32_t>::max()) {
        throw ParseError("entry out of range at " + position(name, r, c));
      }
    }
  }
  for (int r = 0; r < n; ++r) {
    if (m(r, r) != 0) {
      throw ParseError(std::string(name) + " matrix has nonzero diagonal " + symbol + "(" +
                       std::to_string(r) + "," + std::to_string(r) + ")=" +
                       std::to_string(m(r, r)));
    }
    for (int c = r + 1; c < n; ++c) {
      if (m(r, c) != m(c, r)) {
        throw ParseError(std::string(name) + " matrix is asymmetric: " + symbol + "(" +
                         std::to_string(r) + "," + std::to_string(c) + ")=" +
                         std::to_string(m(r, c)) + " but " + symbol + "(" + std::to_string(c) +
                         "," + std::to_string(r) + ")=" + std::to_string(m(c, r)));
      }
    }
  }
  return m;
}

void append_matrix(std::string& out, const CostMatrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ' ';
      out += std::to_string(m(r, c));
    }
    out += '\n';
  }
}

}  // namespace

Instance parse_instance(std::string_view text) {
  Tokenizer tok(text);
  const std::int64_t n = tok.next("problem size");
  if (n < 1 || n > 100000) throw ParseError("problem size " + std::to_string(n) + " out of range");
  CostMatrix flows = read_matrix(tok, static_cast<int>(n), "flow", 'F');
  CostMatrix distances = read_matrix(tok, static_cast<int>(n), "distance", 'D');
  if (!tok.at_end()) throw ParseError("trailing data after distance matrix");
  return Instance(std::move(flows), std::move(distances));
}

std::string write_instance(const Instance& inst) {
  std::string out = std::to_string(inst.n()) + "\n";
  append_matrix(out, inst.flows());
  append_matrix(out, inst.distances());
  return out;
}

Solution parse_solution(std::string_view text) {
  Tokenizer tok(text);
  const std::int64_t n = tok.next("solution size");
  if (n < 1 || n > 100000) throw ParseError("solution size " + std::to_string(n) + " out of range");
  Solution s;
  s.n = static_cast<int>(n);
  s.cost = tok.next("solution cost");
  std::vector<int> loc_of(s.n);
  for (int u = 0; u < s.n; ++u) {
    const std::int64_t l = tok.next("permutation entry " + std::to_string(u + 1));
    if (l < 1 || l > n) {
      throw ParseError("permutation entry " + std::to_string(u + 1) + " = " + std::to_string(l) +
                       " outside 1.." + std::to_string(n));
    }
    loc_of[u] = static_cast<int>(l - 1);
  }
  if (!tok.at_end()) throw ParseError("trailing data after permutation");
  try {
    s.assignment = Assignment::from_loc_of(std::move(loc_of));
  } catch (const ContractError&) {
    throw ParseError("permutation is not a bijection");
  }
  return s;
}

std::string write_solution(int n, Cost cost, const Assignment& a) {
  std::string out = std::to_string(n) + " " + std::to_string(cost) + "\n";
  for (int u = 0; u < a.size(); ++u) {
    if (u) out += ' ';
    out += std::to_string(a.loc_of(u) + 1);
  }
  out += '\n';
  return out;
}

void validate_solution(const Instance& inst, const Solution& s) {
  if (s.n != inst.n()) throw ParseError("solution size does not match instance size");
  const Cost actual = cost(inst, s.assignment);
  if (actual != s.cost) {
    throw ParseError("recorded cost " + std::to_string(s.cost) + " differs from evaluated cost " +
                     std::to_string(actual));
  }
}

std::string write_generator_metadata(const GeneratorMetadata& meta) {
  nlohmann::ordered_json j;
  j["n"] = meta.n;
  j["seed"] = meta.seed;
  j["max_entry"] = meta.max_entry;
  j["rng_name"] = meta.rng_name;
  return j.dump(2) + "\n";
}

GeneratorMetadata parse_generator_metadata(std::string_view json_text) {
  try {
    const auto j = nlohmann::json::parse(json_text);
    GeneratorMetadata meta;
    meta.n = j.at("n").get<int>();
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.max_entry = j.at("max_entry").get<int>();
    meta.rng_name = j.at("rng_name").get<std::string>();
    return meta;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad generator metadata: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << contents;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace qapvdss
