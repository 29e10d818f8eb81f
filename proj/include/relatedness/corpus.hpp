#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "relatedness/clean.hpp"
#include "relatedness/csv.hpp"
#include "relatedness/error.hpp"
#include "relatedness/label.hpp"
#include "relatedness/numeric.hpp"

namespace relatedness {

struct Platform {
  enum class Kind { youtube, reddit, twitter, amazon, other };

  Kind kind = Kind::other;
  std::string other_name;  // only meaningful for Kind::other; empty = unspecified

  static Platform parse(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "youtube" || s == "yt") return {Kind::youtube, {}};
    if (s == "reddit") return {Kind::reddit, {}};
    if (s == "twitter" || s == "x") return {Kind::twitter, {}};
    if (s == "amazon") return {Kind::amazon, {}};
    return {Kind::other, std::string(name)};
  }

  std::string name() const {
    switch (kind) {
      case Kind::youtube: return "YouTube";
      case Kind::reddit: return "Reddit";
      case Kind::twitter: return "Twitter";
      case Kind::amazon: return "Amazon";
      case Kind::other: return other_name;
    }
    return other_name;
  }

  bool operator==(const Platform&) const = default;
};

struct Comment {
  std::string id;
  Platform platform;
  std::optional<std::int64_t> timestamp;  // UTC seconds since epoch
  std::string raw_text;
  std::string clean_text;
  std::optional<SentimentLabel> gold_sentiment;
  double weight = 1.0;

  bool operator==(const Comment&) const = default;
};

struct Corpus {
  std::vector<Comment> comments;
  std::string source_descriptor;

  std::size_t size() const noexcept { return comments.size(); }
  bool empty() const noexcept { return comments.empty(); }

  bool operator==(const Corpus&) const = default;
};

enum class InputFormat { jsonl, csv };

inline InputFormat parse_format(std::string_view name) {
  if (name == "jsonl" || name == "json") return InputFormat::jsonl;
  if (name == "csv") return InputFormat::csv;
  fail(ErrorKind::usage, "unknown input format '" + std::string(name) + "' (expected jsonl or csv)");
}

/// Field/column names read for each Comment field. Only `text` is required
/// to be present in the data.
struct Schema {
  std::string text = "text";
  std::string id = "id";
  std::string platform = "platform";
  std::string timestamp = "timestamp";
  std::string sentiment = "sentiment";
  std::string weight = "weight";

  /// "text=body,id=comment_id"; unspecified fields keep their defaults.
  static Schema parse(std::string_view spec) {
    Schema schema;
    std::size_t pos = 0;
    while (pos < spec.size()) {
      std::size_t comma = spec.find(',', pos);
      if (comma == std::string_view::npos) comma = spec.size();
      std::string_view item = spec.substr(pos, comma - pos);
      pos = comma + 1;
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) fail(ErrorKind::usage, "schema entry '" + std::string(item) + "' is not field=column");
      const std::string_view key = item.substr(0, eq);
      std::string value(item.substr(eq + 1));
      if (key == "text") schema.text = value;
      else if (key == "id") schema.id = value;
      else if (key == "platform") schema.platform = value;
      else if (key == "timestamp") schema.timestamp = value;
      else if (key == "sentiment") schema.sentiment = value;
      else if (key == "weight") schema.weight = value;
      else fail(ErrorKind::usage, "unknown schema field '" + std::string(key) + "'");
    }
    return schema;
  }

  std::string to_string() const {
    return "text=" + text + ",id=" + id + ",platform=" + platform + ",timestamp=" + timestamp +
           ",sentiment=" + sentiment + ",weight=" + weight;
  }

  bool operator==(const Schema&) const = default;
};

namespace detail {

inline std::optional<int> fixed_digits(std::string_view s, std::size_t at, std::size_t count) {
  if (at + count > s.size()) return std::nullopt;
  int v = 0;
  for (std::size_t i = at; i < at + count; ++i) {
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

}  // namespace detail

/// Integer epoch seconds, or ISO-8601 "YYYY-MM-DD[(T| )HH:MM[:SS[.frac]]][Z|+HH:MM|-HH:MM]".
/// Fractional seconds are truncated.
inline std::optional<std::int64_t> parse_timestamp(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (auto epoch = parse_int(text)) return epoch;

  using namespace std::chrono;
  const auto y = detail::fixed_digits(text, 0, 4);
  const auto mo = detail::fixed_digits(text, 5, 2);
  const auto d = detail::fixed_digits(text, 8, 2);
  if (!y || !mo || !d || text[4] != '-' || text[7] != '-') return std::nullopt;
  const year_month_day date{year{*y}, month{static_cast<unsigned>(*mo)}, day{static_cast<unsigned>(*d)}};
  if (!date.ok()) return std::nullopt;
  std::int64_t seconds = duration_cast<std::chrono::seconds>(sys_days{date}.time_since_epoch()).count();

  std::size_t pos = 10;
  if (pos < text.size() && (text[pos] == 'T' || text[pos] == ' ')) {
    const auto hh = detail::fixed_digits(text, pos + 1, 2);
    const auto mm = detail::fixed_digits(text, pos + 4, 2);
    if (!hh || !mm || text[pos + 3] != ':' || *hh > 23 || *mm > 59) return std::nullopt;
    seconds += *hh * 3600 + *mm * 60;
    pos += 6;
    if (pos < text.size() && text[pos] == ':') {
      const auto ss = detail::fixed_digits(text, pos + 1, 2);
      if (!ss || *ss > 60) return std::nullopt;
      seconds += *ss;
      pos += 3;
      if (pos < text.size() && text[pos] == '.') {
        ++pos;
        const std::size_t start = pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
        if (pos == start) return std::nullopt;
      }
    }
    if (pos < text.size()) {
      if (text[pos] == 'Z' || text[pos] == 'z') {
        ++pos;
      } else if (text[pos] == '+' || text[pos] == '-') {
        const int sign = text[pos] == '+' ? 1 : -1;
        const auto oh = detail::fixed_digits(text, pos + 1, 2);
        if (!oh) return std::nullopt;
        std::size_t after = pos + 3;
        std::optional<int> om = 0;
        if (after < text.size() && text[after] == ':') om = detail::fixed_digits(text, after + 1, 2), after += 3;
        else if (after < text.size()) om = detail::fixed_digits(text, after, 2), after += 2;
        if (!om) return std::nullopt;
        seconds -= sign * (*oh * 3600 + *om * 60);
        pos = after;
      }
    }
  }
  if (pos != text.size()) return std::nullopt;
  return seconds;
}

namespace detail {

inline std::string line_prefix(std::size_t line) { return "line " + std::to_string(line) + ": "; }

inline void check_unique_ids(const Corpus& corpus) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(corpus.comments.size());
  for (const auto& c : corpus.comments)
    if (!seen.insert(c.id).second) fail(ErrorKind::parse, "duplicate comment id '" + c.id + "'");
}

inline Comment comment_from_json(const nlohmann::json& row, const Schema& schema, std::size_t row_index,
                                 std::size_t line) {
  if (!row.is_object()) fail(ErrorKind::parse, line_prefix(line) + "expected a JSON object");
  Comment c;
  const auto text = row.find(schema.text);
  if (text == row.end() || !text->is_string())
    fail(ErrorKind::parse, line_prefix(line) + "missing string field '" + schema.text + "'");
  c.raw_text = text->get<std::string>();

  if (auto it = row.find(schema.id); it != row.end() && !it->is_null()) {
    if (it->is_string()) c.id = it->get<std::string>();
    else if (it->is_number_integer()) c.id = std::to_string(it->get<std::int64_t>());
    else fail(ErrorKind::parse, line_prefix(line) + "field '" + schema.id + "' must be a string or integer");
  } else {
    c.id = std::to_string(row_index);
  }
  if (auto it = row.find(schema.platform); it != row.end() && !it->is_null()) {
    if (!it->is_string()) fail(ErrorKind::parse, line_prefix(line) + "field '" + schema.platform + "' must be a string");
    c.platform = Platform::parse(it->get<std::string>());
  }
  if (auto it = row.find(schema.timestamp); it != row.end() && !it->is_null()) {
    if (it->is_number_integer()) c.timestamp = it->get<std::int64_t>();
    else if (it->is_string()) c.timestamp = parse_timestamp(it->get<std::string>());
    if (!c.timestamp) fail(ErrorKind::parse, line_prefix(line) + "unparseable timestamp");
  }
  if (auto it = row.find(schema.sentiment); it != row.end() && !it->is_null()) {
    std::string value = it->is_string() ? it->get<std::string>() : it->is_number_integer() ? std::to_string(it->get<std::int64_t>()) : "";
    c.gold_sentiment = parse_label(value);
    if (!c.gold_sentiment) fail(ErrorKind::parse, line_prefix(line) + "unknown sentiment label");
  }
  if (auto it = row.find(schema.weight); it != row.end() && !it->is_null()) {
    if (!it->is_number() || !(it->get<double>() > 0.0))
      fail(ErrorKind::parse, line_prefix(line) + "field '" + schema.weight + "' must be a positive number");
    c.weight = it->get<double>();
  }
  if (auto it = row.find("clean_text"); it != row.end() && it->is_string()) c.clean_text = it->get<std::string>();
  return c;
}

inline Corpus read_jsonl(std::istream& in, const Schema& schema) {
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorKind::parse, line_prefix(line_no) + "malformed JSON (" + e.what() + ")");
    }
    corpus.comments.push_back(comment_from_json(row, schema, corpus.comments.size(), line_no));
  }
  return corpus;
}

inline Corpus read_csv(std::istream& in, const Schema& schema) {
  Corpus corpus;
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) return corpus;
  if (!header->empty() && header->front().starts_with("\xEF\xBB\xBF")) header->front().erase(0, 3);

  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header->begin(), header->end(), name);
    if (it == header->end()) return std::nullopt;
    return static_cast<std::size_t>(it - header->begin());
  };
  const auto text_col = column(schema.text);
  if (!text_col) fail(ErrorKind::schema, "csv header has no text column '" + schema.text + "'");
  const auto id_col = column(schema.id);
  const auto platform_col = column(schema.platform);
  const auto time_col = column(schema.timestamp);
  const auto sentiment_col = column(schema.sentiment);
  const auto weight_col = column(schema.weight);
  const auto clean_col = column("clean_text");

  while (auto record = reader.next()) {
    const std::size_t line = reader.line();
    if (record->size() == 1 && record->front().empty()) continue;
    if (record->size() != header->size())
      fail(ErrorKind::parse, line_prefix(line) + "expected " + std::to_string(header->size()) + " columns, found " +
                                 std::to_string(record->size()));
    const auto& r = *record;
    Comment c;
    c.raw_text = r[*text_col];
    c.id = id_col && !r[*id_col].empty() ? r[*id_col] : std::to_string(corpus.comments.size());
    if (platform_col && !r[*platform_col].empty()) c.platform = Platform::parse(r[*platform_col]);
    if (time_col && !r[*time_col].empty()) {
      c.timestamp = parse_timestamp(r[*time_col]);
      if (!c.timestamp) fail(ErrorKind::parse, line_prefix(line) + "unparseable timestamp '" + r[*time_col] + "'");
    }
    if (sentiment_col && !r[*sentiment_col].empty()) {
      c.gold_sentiment = parse_label(r[*sentiment_col]);
      if (!c.gold_sentiment) fail(ErrorKind::parse, line_prefix(line) + "unknown sentiment label '" + r[*sentiment_col] + "'");
    }
    if (weight_col && !r[*weight_col].empty()) {
      const auto w = parse_double(r[*weight_col]);
      if (!w || !(*w > 0.0)) fail(ErrorKind::parse, line_prefix(line) + "weight must be a positive number");
      c.weight = *w;
    }
    if (clean_col) c.clean_text = r[*clean_col];
    corpus.comments.push_back(std::move(c));
  }
  return corpus;
}

}  // namespace detail

inline Corpus read_corpus(std::istream& in, InputFormat format, const Schema& schema = {},
                          std::string source_descriptor = {}) {
  Corpus corpus = format == InputFormat::jsonl ? detail::read_jsonl(in, schema) : detail::read_csv(in, schema);
  corpus.source_descriptor = std::move(source_descriptor);
  detail::check_unique_ids(corpus);
  return corpus;
}

/// Loads a comment file. Ids default to the zero-based data-row index.
/// An empty file yields an empty corpus.
inline Corpus load_corpus(const std::string& path, InputFormat format, const Schema& schema = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::parse, "cannot open '" + path + "'");
  return read_corpus(in, format, schema, path);
}

/// Writes one JSON object per comment with the default schema field names;
/// read_corpus(jsonl) reproduces the same comments.
inline void write_jsonl(std::ostream& out, const Corpus& corpus) {
  for (const auto& c : corpus.comments) {
    nlohmann::ordered_json row;
    row["id"] = c.id;
    if (const auto name = c.platform.name(); !name.empty()) row["platform"] = name;
    if (c.timestamp) row["timestamp"] = *c.timestamp;
    row["text"] = c.raw_text;
    if (!c.clean_text.empty()) row["clean_text"] = c.clean_text;
    if (c.gold_sentiment) row["sentiment"] = std::string(to_string(*c.gold_sentiment));
    if (c.weight != 1.0) row["weight"] = c.weight;
    out << row.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
}

/// Fills clean_text for every comment.
inline void clean_corpus(Corpus& corpus) {
  for (auto& c : corpus.comments) c.clean_text = clean_text(c.raw_text);
}

/// Half-open interval [start, end) in UTC seconds.
struct TimeBucket {
  std::string label;
  std::int64_t start = 0;
  std::int64_t end = 0;

  bool contains(std::int64_t t) const noexcept { return t >= start && t < end; }
  bool operator==(const TimeBucket&) const = default;
};

/// "label=START,END" with START/END as epoch seconds or ISO-8601 dates.
inline TimeBucket parse_time_bucket(std::string_view spec) {
  const auto eq = spec.find('=');
  const auto comma = spec.find(',', eq == std::string_view::npos ? 0 : eq);
  if (eq == std::string_view::npos || comma == std::string_view::npos)
    fail(ErrorKind::usage, "bucket '" + std::string(spec) + "' is not label=start,end");
  const auto start = parse_timestamp(spec.substr(eq + 1, comma - eq - 1));
  const auto end = parse_timestamp(spec.substr(comma + 1));
  if (!start || !end) fail(ErrorKind::usage, "bucket '" + std::string(spec) + "' has an unparseable bound");
  return {std::string(spec.substr(0, eq)), *start, *end};
}

inline void validate_buckets(const std::vector<TimeBucket>& buckets) {
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    const auto& a = buckets[i];
    if (!(a.start < a.end)) fail(ErrorKind::usage, "bucket '" + a.label + "' has start >= end");
    for (std::size_t j = 0; j < i; ++j) {
      const auto& b = buckets[j];
      if (a.label == b.label) fail(ErrorKind::usage, "duplicate bucket label '" + a.label + "'");
      if (a.start < b.end && b.start < a.end)
        fail(ErrorKind::usage, "buckets '" + b.label + "' and '" + a.label + "' overlap");
    }
  }
}

/// Each timestamped comment lands in the bucket containing it, if any.
/// Comments without timestamps land nowhere. Per-bucket order is corpus order.
inline std::map<std::string, Corpus> bucket_by_time(const Corpus& corpus, const std::vector<TimeBucket>& buckets) {
  validate_buckets(buckets);
  std::map<std::string, Corpus> out;
  for (const auto& b : buckets) out[b.label].source_descriptor = corpus.source_descriptor + "#" + b.label;
  for (const auto& c : corpus.comments) {
    if (!c.timestamp) continue;
    for (const auto& b : buckets) {
      if (b.contains(*c.timestamp)) {
        out[b.label].comments.push_back(c);
        break;
      }
    }
  }
  return out;
}

}  // namespace relatedness
