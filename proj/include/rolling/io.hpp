#ifndef ROLLING_IO_HPP
#define ROLLING_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rolling {

// %.17g: enough digits to round-trip any double, so equal values always
// print identically and reruns are byte-comparable.
std::string format_double(double v);

// One typed table cell; typing is kept so the JSON mirror can carry real
// numbers while the CSV uses the pinned text format.
struct Cell {
  enum class Kind { Text, Real, Integer };
  Kind kind = Kind::Text;
  std::string text;
  double real = 0.0;
  long long integer = 0;
};

Cell text_cell(std::string value);
Cell real_cell(double value);
Cell int_cell(long long value);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

// RFC-4180: CRLF line endings, fields quoted when they contain commas,
// quotes, or line breaks, embedded quotes doubled.
void write_csv(const std::filesystem::path& path, const Table& table);

// Same table as an array of objects (one per row, columns in order).
void write_json_mirror(const std::filesystem::path& path, const Table& table);

// Writes both representations: <stem>.csv and <stem>.json.
void write_table(const std::filesystem::path& directory,
                 const std::string& stem, const Table& table);

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

}  // namespace rolling

#endif
