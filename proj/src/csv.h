#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace relu_prism::internal {

struct CsvRecord {
  std::size_t line;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

// RFC 4180 reader: comma separator, double-quoted fields with "" escapes,
// quoted fields may span lines. Blank lines are skipped. Throws SchemaError
// on an unterminated quote.
std::vector<CsvRecord> read_csv_records(std::istream& in);

// Quotes the field when it holds a comma, quote or newline.
std::string csv_escape(const std::string& field);

}  // namespace relu_prism::internal
