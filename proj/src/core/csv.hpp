#pragma once

#include <string>
#include <vector>

namespace fairaudit {

// Minimal CSV reader for the flat comma-separated files this project
// exchanges: no quoting, no embedded commas, one record per line.
// Blank lines are skipped; a trailing '\r' is stripped.
struct CsvRow {
  long line;  // 1-based line number in the file
  std::vector<std::string> fields;
};

// Reads the whole file. `expected_header` is matched case-sensitively against
// the first non-blank line; a mismatch or a row with the wrong field count
// raises a Parse error naming the line.
std::vector<CsvRow> read_csv(const std::string& path,
                             const std::vector<std::string>& expected_header);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace fairaudit
