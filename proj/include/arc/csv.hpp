#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace arc::csv {

// Reads one RFC-4180 record (quoted fields may contain commas, quotes and
// newlines). Returns nullopt at end of stream.
std::optional<std::vector<std::string>> read_record(std::istream& in);

// Quotes a field only when needed.
std::string quote(const std::string& field);

void write_record(std::ostream& out, const std::vector<std::string>& fields);

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

}  // namespace arc::csv
