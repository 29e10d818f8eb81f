#pragma once

// Minimal RFC 4180 reader/writer: comma separator, '"' quoting with
// doubled quotes, CRLF or LF record ends, newlines allowed inside quotes.

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relatedness/error.hpp"

namespace relatedness::csv {

using Record = std::vector<std::string>;

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next record, or nullopt at end of input. `line()` reports the physical
  /// line on which the returned record started (1-based).
  std::optional<Record> next() {
    Record record;
    std::string field;
    bool quoted = false;
    bool any = false;
    record_line_ = line_ + 1;
    int c = 0;
    while ((c = in_.get()) != std::char_traits<char>::eof()) {
      any = true;
      const char ch = static_cast<char>(c);
      if (quoted) {
        if (ch == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field.push_back('"');
          } else {
            quoted = false;
          }
        } else {
          if (ch == '\n') ++line_;
          field.push_back(ch);
        }
        continue;
      }
      if (ch == '"' && field.empty()) {
        quoted = true;
      } else if (ch == ',') {
        record.push_back(std::move(field));
        field.clear();
      } else if (ch == '\r' && in_.peek() == '\n') {
        continue;
      } else if (ch == '\n') {
        ++line_;
        record.push_back(std::move(field));
        return record;
      } else {
        field.push_back(ch);
      }
    }
    if (quoted) fail(ErrorKind::parse, "line " + std::to_string(record_line_) + ": unterminated quoted field");
    if (!any) return std::nullopt;
    record.push_back(std::move(field));
    ++line_;
    return record;
  }

  std::size_t line() const noexcept { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
};

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

inline std::string join(const Record& record) {
  std::string out;
  for (std::size_t i = 0; i < record.size(); ++i) {
    if (i) out.push_back(',');
    out += quote(record[i]);
  }
  return out;
}

}  // namespace relatedness::csv
