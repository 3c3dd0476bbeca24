#include "motiv/csv.hpp"

#include <algorithm>

#include "motiv/errors.hpp"

namespace motiv::csv {

std::optional<Row> Reader::next() {
  std::string line;
  if (!std::getline(in_, line)) return std::nullopt;
  ++line_;
  Row row;
  row.line = line_;

  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (;;) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            ++i;
          } else {
            quoted = false;
          }
        } else {
          field += c;
        }
      } else if (c == '"' && field.empty() && !was_quoted) {
        quoted = true;
        was_quoted = true;
      } else if (c == ',') {
        row.fields.push_back(std::move(field));
        field.clear();
        was_quoted = false;
      } else if (c == '\r' && i + 1 == line.size()) {
        // CRLF
      } else {
        field += c;
      }
    }
    if (!quoted) break;
    // Line break inside a quoted field.
    if (!std::getline(in_, line)) {
      throw InputError("line " + std::to_string(row.line) + ": unterminated quoted field");
    }
    ++line_;
    field += '\n';
  }
  row.fields.push_back(std::move(field));
  return row;
}

Header::Header(std::vector<std::string> names, std::string_view source)
    : names_(std::move(names)), source_(source) {
  for (auto& n : names_) {
    // Strip a UTF-8 byte-order mark and surrounding blanks.
    if (n.rfind("\xEF\xBB\xBF", 0) == 0) n.erase(0, 3);
    while (!n.empty() && (n.back() == ' ' || n.back() == '\t')) n.pop_back();
    while (!n.empty() && (n.front() == ' ' || n.front() == '\t')) n.erase(0, 1);
  }
}

std::optional<std::size_t> Header::find(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t Header::index(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw InputError(source_ + ": missing column '" + std::string(name) + "'");
}

void Header::require(std::initializer_list<std::string_view> names) const {
  for (auto n : names) index(n);
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += escape(fields[i]);
  }
  return out;
}

}  // namespace motiv::csv
