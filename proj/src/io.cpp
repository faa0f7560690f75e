#include "rolling/io.hpp"

#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "rolling/errors.hpp"

namespace rolling {

std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

Cell text_cell(std::string value) {
  Cell c;
  c.kind = Cell::Kind::Text;
  c.text = std::move(value);
  return c;
}

Cell real_cell(double value) {
  Cell c;
  c.kind = Cell::Kind::Real;
  c.real = value;
  return c;
}

Cell int_cell(long long value) {
  Cell c;
  c.kind = Cell::Kind::Integer;
  c.integer = value;
  return c;
}

namespace {

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string cell_text(const Cell& cell) {
  switch (cell.kind) {
    case Cell::Kind::Real:
      return format_double(cell.real);
    case Cell::Kind::Integer:
      return std::to_string(cell.integer);
    case Cell::Kind::Text:
      break;
  }
  return cell.text;
}

void check_width(const Table& table) {
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) {
      throw ContractViolation("table row width does not match header");
    }
  }
}

}  // namespace

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot open '" + path.string() + "' for writing");
  }
  out << content;
  if (!out) {
    throw ConfigError("failed writing '" + path.string() + "'");
  }
}

void write_csv(const std::filesystem::path& path, const Table& table) {
  check_width(table);
  std::string content;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c > 0) content += ',';
    content += csv_escape(table.columns[c]);
  }
  content += "\r\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) content += ',';
      content += csv_escape(cell_text(row[c]));
    }
    content += "\r\n";
  }
  write_text_file(path, content);
}

void write_json_mirror(const std::filesystem::path& path, const Table& table) {
  check_width(table);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      const Cell& cell = row[c];
      switch (cell.kind) {
        case Cell::Kind::Real:
          obj[table.columns[c]] = cell.real;
          break;
        case Cell::Kind::Integer:
          obj[table.columns[c]] = cell.integer;
          break;
        case Cell::Kind::Text:
          obj[table.columns[c]] = cell.text;
          break;
      }
    }
    rows.push_back(std::move(obj));
  }
  write_text_file(path, rows.dump(2) + "\n");
}

void write_table(const std::filesystem::path& directory,
                 const std::string& stem, const Table& table) {
  std::filesystem::create_directories(directory);
  write_csv(directory / (stem + ".csv"), table);
  write_json_mirror(directory / (stem + ".json"), table);
}

}  // namespace rolling
