#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <algorithm>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "relatedness/clean.hpp"
#include "relatedness/error.hpp"
#include "relatedness/numeric.hpp"

namespace relatedness {

/// Row-major n x dim matrix of sentence vectors; row i belongs to ids[i].
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  EmbeddingMatrix(std::vector<std::string> ids, std::size_t dim, std::vector<double> values)
      : ids_(std::move(ids)), dim_(dim), values_(std::move(values)) {
    if (values_.size() != ids_.size() * dim_)
      fail(ErrorKind::dimension, "matrix storage holds " + std::to_string(values_.size()) + " values, expected " +
                                     std::to_string(ids_.size() * dim_));
  }

  /// Zero-filled n x dim matrix.
  EmbeddingMatrix(std::vector<std::string> ids, std::size_t dim)
      : ids_(std::move(ids)), dim_(dim), values_(ids_.size() * dim, 0.0) {}

  std::size_t rows() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::string& id(std::size_t row) const { return ids_[row]; }
  std::span<const double> values() const noexcept { return values_; }

  std::span<const double> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
  std::span<double> row(std::size_t i) { return {values_.data() + i * dim_, dim_}; }

  double operator()(std::size_t r, std::size_t c) const { return values_[r * dim_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values_[r * dim_ + c]; }

  /// Row index for an id; throws lookup error when absent.
  std::size_t index_of(std::string_view id) const {
    for (std::size_t i = 0; i < ids_.size(); ++i)
      if (ids_[i] == id) return i;
    fail(ErrorKind::lookup, "unknown comment id '" + std::string(id) + "'");
  }

  std::unordered_map<std::string_view, std::size_t> index() const {
    std::unordered_map<std::string_view, std::size_t> map;
    map.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) map.emplace(ids_[i], i);
    return map;
  }

  bool operator==(const EmbeddingMatrix&) const = default;

 private:
  std::vector<std::string> ids_;
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

inline double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

inline bool is_zero(std::span<const double> v) {
  for (double x : v)
    if (x != 0.0) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Word vectors

/// token -> dense vector, all of one dimension.
class WordVectorTable {
 public:
  explicit WordVectorTable(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return tokens_.size(); }

  /// Inserts or replaces (last write wins).
  void set(std::string token, std::span<const double> vector) {
    if (vector.size() != dim_)
      fail(ErrorKind::dimension, "vector for '" + token + "' has " + std::to_string(vector.size()) +
                                     " components, table dim is " + std::to_string(dim_));
    const auto [it, inserted] = index_.try_emplace(token, tokens_.size());
    if (inserted) {
      tokens_.push_back(std::move(token));
      values_.insert(values_.end(), vector.begin(), vector.end());
    } else {
      std::copy(vector.begin(), vector.end(), values_.begin() + static_cast<std::ptrdiff_t>(it->second * dim_));
    }
  }

  /// Vector for a token, or an empty span when absent.
  std::span<const double> find(std::string_view token) const {
    const auto it = index_.find(std::string(token));
    if (it == index_.end()) return {};
    return {values_.data() + it->second * dim_, dim_};
  }

  /// Tokens in first-insertion order.
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::size_t dim_;
  std::vector<std::string> tokens_;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

namespace detail {

inline void split_spaces(std::string_view line, std::vector<std::string_view>& fields) {
  fields.clear();
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
}

inline std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

}  // namespace detail

/// Parses "token v1 ... vd" lines (GloVe text format). A leading "count dim"
/// header line (word2vec/fastText .vec) is recognized and skipped.
inline WordVectorTable read_word_vectors(std::istream& in) {
  std::string line;
  std::vector<std::string_view> fields;
  std::vector<double> vec;
  std::optional<WordVectorTable> table;
  std::optional<std::size_t> header_dim;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    detail::split_spaces(line, fields);
    if (fields.empty()) continue;
    if (line_no == 1 && fields.size() == 2) {
      const auto count = parse_int(fields[0]);
      const auto dim = parse_int(fields[1]);
      if (count && dim && *count >= 0 && *dim > 0 && *dim != 1) {
        header_dim = static_cast<std::size_t>(*dim);
        continue;
      }
    }
    if (fields.size() < 2) fail(ErrorKind::parse, detail::at_line(line_no) + "expected a token followed by components");
    const std::size_t dim = fields.size() - 1;
    if (!table) {
      if (header_dim && *header_dim != dim)
        fail(ErrorKind::parse, detail::at_line(line_no) + "header declares dim " + std::to_string(*header_dim) +
                                   ", line has " + std::to_string(dim));
      table.emplace(dim);
    } else if (dim != table->dim()) {
      fail(ErrorKind::parse, detail::at_line(line_no) + "expected " + std::to_string(table->dim()) +
                                 " components, found " + std::to_string(dim));
    }
    vec.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      const auto v = parse_double(fields[k + 1]);
      if (!v) fail(ErrorKind::parse, detail::at_line(line_no) + "non-numeric component '" + std::string(fields[k + 1]) + "'");
      vec[k] = *v;
    }
    table->set(std::string(fields[0]), vec);
  }
  if (!table) fail(ErrorKind::parse, "word vector file contains no vectors");
  return std::move(*table);
}

inline WordVectorTable parse_word_vectors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::parse, "cannot open '" + path + "'");
  return read_word_vectors(in);
}

inline void write_word_vectors(std::ostream& out, const WordVectorTable& table) {
  for (const auto& token : table.tokens()) {
    out << token;
    for (double v : table.find(token)) out << ' ' << format_double(v);
    out << '\n';
  }
}

struct PooledVector {
  std::vector<double> values;
  bool out_of_vocabulary = false;
};

/// Mean of the vectors of whitespace-separated tokens found in the table.
/// No matches gives the zero vector with out_of_vocabulary set.
inline PooledVector embed_mean(std::string_view clean, const WordVectorTable& table) {
  PooledVector result{std::vector<double>(table.dim(), 0.0), false};
  std::size_t matched = 0;
  std::size_t i = 0;
  while (i < clean.size()) {
    while (i < clean.size() && clean[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < clean.size() && clean[i] != ' ') ++i;
    if (i == start) continue;
    const auto vec = table.find(clean.substr(start, i - start));
    if (vec.empty()) continue;
    for (std::size_t k = 0; k < vec.size(); ++k) result.values[k] += vec[k];
    ++matched;
  }
  if (matched == 0) {
    result.out_of_vocabulary = true;
    return result;
  }
  for (double& v : result.values) v /= static_cast<double>(matched);
  return result;
}

// ---------------------------------------------------------------------------
// Embedding matrix files: "n d" header, then n lines "id v1 ... vd".

inline EmbeddingMatrix read_embedding_matrix(std::istream& in) {
  std::string line;
  std::vector<std::string_view> fields;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      detail::split_spaces(line, fields);
      if (!fields.empty()) return true;
    }
    return false;
  };
  if (!next_line()) fail(ErrorKind::parse, "embedding matrix file is empty (expected header \"n d\")");
  const auto n = fields.size() == 2 ? parse_int(fields[0]) : std::nullopt;
  const auto d = fields.size() == 2 ? parse_int(fields[1]) : std::nullopt;
  if (!n || !d || *n < 0 || *d <= 0) fail(ErrorKind::parse, detail::at_line(line_no) + "expected header \"n d\"");
  const auto rows = static_cast<std::size_t>(*n);
  const auto dim = static_cast<std::size_t>(*d);

  std::vector<std::string> ids;
  std::vector<double> values;
  ids.reserve(rows);
  values.reserve(rows * dim);
  while (next_line()) {
    if (ids.size() == rows) fail(ErrorKind::parse, "expected " + std::to_string(rows) + " rows, found more");
    if (fields.size() != dim + 1)
      fail(ErrorKind::parse, detail::at_line(line_no) + "expected id plus " + std::to_string(dim) + " values, found " +
                                 std::to_string(fields.size()) + " fields");
    ids.emplace_back(fields[0]);
    for (std::size_t k = 1; k <= dim; ++k) {
      const auto v = parse_double(fields[k]);
      if (!v) fail(ErrorKind::parse, detail::at_line(line_no) + "non-numeric value '" + std::string(fields[k]) + "'");
      values.push_back(*v);
    }
  }
  if (ids.size() != rows)
    fail(ErrorKind::parse, "expected " + std::to_string(rows) + " rows, found " + std::to_string(ids.size()));
  return {std::move(ids), dim, std::move(values)};
}

inline EmbeddingMatrix load_embedding_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::parse, "cannot open '" + path + "'");
  return read_embedding_matrix(in);
}

/// Values use shortest round-trip formatting, so save/load is bit-exact.
inline void write_embedding_matrix(std::ostream& out, const EmbeddingMatrix& m) {
  out << m.rows() << ' ' << m.dim() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << m.id(i);
    for (double v : m.row(i)) out << ' ' << format_double(v);
    out << '\n';
  }
}

inline void save_embedding_matrix(const std::string& path, const EmbeddingMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::parse, "cannot write '" + path + "'");
  write_embedding_matrix(out, m);
}

// ---------------------------------------------------------------------------
// Feature-hashing embedder

namespace detail {

constexpr std::uint64_t fnv1a(std::span<const char32_t> cps, std::uint64_t seed) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ mix_seed(seed);
  for (char32_t cp : cps) {
    for (int shift = 0; shift < 32; shift += 8) {
      h ^= (cp >> shift) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  return mix_seed(h);
}

}  // namespace detail

/// Character 3-grams of the text framed by boundary marks (U+0002 ... U+0003)
/// hashed into `dim` buckets, then L2-normalized. Empty text has no 3-grams
/// and maps to the zero vector.
inline std::vector<double> hash_embed(std::string_view clean, std::size_t dim, std::uint64_t seed) {
  if (dim < 2) fail(ErrorKind::arity, "hash embedding dim must be >= 2");
  std::vector<double> v(dim, 0.0);
  std::u32string cps = utf8::decode_lossy(clean);
  if (cps.empty()) return v;
  cps.insert(cps.begin(), U'\x02');
  cps.push_back(U'\x03');
  for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
    const auto h = detail::fnv1a(std::span<const char32_t>(cps.data() + i, 3), seed);
    v[h % dim] += 1.0;
  }
  const double norm = std::sqrt(squared_norm(v));
  for (double& x : v) x /= norm;
  return v;
}

// ---------------------------------------------------------------------------

struct NormalizedMatrix {
  EmbeddingMatrix matrix;
  std::vector<std::size_t> zero_rows;  // left unchanged
};

inline NormalizedMatrix l2_normalize(EmbeddingMatrix matrix) {
  NormalizedMatrix out{std::move(matrix), {}};
  for (std::size_t i = 0; i < out.matrix.rows(); ++i) {
    auto row = out.matrix.row(i);
    const double norm = std::sqrt(squared_norm(row));
    if (norm == 0.0) {
      out.zero_rows.push_back(i);
      continue;
    }
    for (double& x : row) x /= norm;
  }
  return out;
}

}  // namespace relatedness
