#include "core/csv.hpp"

#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace fairaudit {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(current);
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  fields.push_back(current);
  return fields;
}

std::vector<CsvRow> read_csv(const std::string& path,
                             const std::vector<std::string>& expected_header) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::Io, "cannot open '" + path + "'");

  std::vector<CsvRow> rows;
  std::string line;
  long line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (!header_seen) {
      if (fields != expected_header) {
        std::ostringstream want;
        for (size_t i = 0; i < expected_header.size(); ++i) {
          if (i) want << ',';
          want << expected_header[i];
        }
        raise(ErrorCode::Parse, path + ":" + std::to_string(line_no) +
                                    ": expected header '" + want.str() +
                                    "', got '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != expected_header.size()) {
      raise(ErrorCode::Parse,
            path + ":" + std::to_string(line_no) + ": expected " +
                std::to_string(expected_header.size()) + " fields, got " +
                std::to_string(fields.size()));
    }
    rows.push_back(CsvRow{line_no, std::move(fields)});
  }
  if (!header_seen) raise(ErrorCode::Parse, path + ": empty file");
  return rows;
}

}  // namespace fairaudit
