#pragma once

// Minimal RFC 4180 reader/writer: quoted fields, doubled quotes, embedded newlines.

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "culture/core.hpp"

namespace culture::csv {

using Row = std::vector<std::string>;

inline std::string quote(std::string_view field) {
  bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void write_row(std::ostream& os, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) os << ',';
    os << quote(row[i]);
  }
  os << '\n';
}

struct Record {
  Row fields;
  std::size_t line = 0;  // 1-based line where the record starts
};

inline std::vector<Record> read_all(std::istream& is) {
  std::vector<Record> out;
  std::string data((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  Record cur;
  std::string field;
  bool in_quotes = false, field_started = false, row_has_content = false;
  std::size_t line = 1;
  cur.line = 1;
  auto end_field = [&] {
    cur.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    if (row_has_content || !cur.fields.empty()) {
      end_field();
      out.push_back(std::move(cur));
    }
    cur = Record{};
    row_has_content = false;
  };
  for (std::size_t i = 0; i < data.size(); ++i) {
    char c = data[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = field_started = row_has_content = true;
    } else if (c == ',') {
      row_has_content = true;
      end_field();
    } else if (c == '\r') {
      continue;
    } else if (c == '\n') {
      end_row();
      ++line;
      cur.line = line;
    } else {
      field += c;
      field_started = row_has_content = true;
    }
  }
  if (in_quotes) throw Error("csv: unterminated quoted field starting near line " + std::to_string(cur.line));
  end_row();
  return out;
}

}  // namespace culture::csv
