#include "csv.h"

#include <istream>

#include <fmt/format.h>

#include "relu_prism/error.h"

namespace relu_prism::internal {

std::vector<CsvRecord> read_csv_records(std::istream& in) {
  std::vector<CsvRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    CsvRecord rec{line_no, {}};
    std::string field;
    bool quoted = false;
    std::size_t i = 0;
    while (true) {
      if (i == line.size()) {
        if (!quoted) break;
        // Quoted field continues on the next physical line.
        std::string next;
        if (!std::getline(in, next)) {
          throw SchemaError(fmt::format("line {}: unterminated quoted field", rec.line));
        }
        ++line_no;
        if (!next.empty() && next.back() == '\r') next.pop_back();
        field.push_back('\n');
        line = std::move(next);
        i = 0;
        continue;
      }
      const char c = line[i++];
      if (quoted) {
        if (c == '"') {
          if (i < line.size() && line[i] == '"') {
            field.push_back('"');
            ++i;
          } else {
            quoted = false;
          }
        } else {
          field.push_back(c);
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        rec.fields.push_back(std::move(field));
        field.clear();
      } else {
        field.push_back(c);
      }
    }
    rec.fields.push_back(std::move(field));
    records.push_back(std::move(rec));
  }
  return records;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace relu_prism::internal
