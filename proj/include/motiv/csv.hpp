#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace motiv::csv {

struct Row {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

/// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
/// newlines. Accepts LF or CRLF line endings.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next record, or nullopt at end of input. Throws InputError on an
  /// unterminated quoted field.
  std::optional<Row> next();

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

/// Reads the header row and maps names to column indices; throws
/// InputError naming `source` when a required column is missing.
class Header {
 public:
  Header(std::vector<std::string> names, std::string_view source);

  std::size_t index(std::string_view name) const;
  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t size() const { return names_.size(); }

  void require(std::initializer_list<std::string_view> names) const;

 private:
  std::vector<std::string> names_;
  std::string source_;
};

/// Quotes a field when it contains a comma, quote, or line break.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

}  // namespace motiv::csv
