#pragma once

#include <bttie/errors.hpp>

#include <istream>
#include <string>
#include <vector>

namespace bttie::csv {

// Splits one RFC 4180 record. Quoted fields may contain commas and doubled
// quotes; embedded newlines are not supported.
inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          field += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  if (quoted) throw ParseError("unterminated quote in CSV line: " + line);
  out.push_back(std::move(field));
  return out;
}

inline std::string escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Reads non-empty lines, checking the header matches `expected` exactly.
inline std::vector<std::vector<std::string>> read_table(std::istream& in,
                                                        const std::vector<std::string>& expected) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty CSV input");
  auto header = split_line(line);
  for (auto& h : header) h = trim(h);
  if (header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw ParseError("unexpected CSV header, expected '" + want + "'");
  }
  std::vector<std::vector<std::string>> rows;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto row = split_line(line);
    if (row.size() != expected.size())
      throw ParseError("line " + std::to_string(lineno) + ": expected " + std::to_string(expected.size()) +
                       " fields, got " + std::to_string(row.size()));
    for (auto& f : row) f = trim(f);
    rows.push_back(std::move(row));
  }
  return rows;
}

} // namespace bttie::csv
