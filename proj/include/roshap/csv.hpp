#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace roshap::csv {

using Row = std::vector<std::string>;

// Reads one RFC-4180 record (quoted fields, doubled quotes, CRLF or LF).
// Returns false at end of input.
bool read_record(std::istream& in, Row& fields);

std::vector<Row> read_all(std::istream& in);

// Quotes a field only when it contains a separator, quote or line break.
std::string escape(std::string_view field);

void write_record(std::ostream& out, const Row& fields);

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

std::optional<double> parse_double(std::string_view text);

}  // namespace roshap::csv
