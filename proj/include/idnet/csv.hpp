#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace idnet::csv {

/// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_record(std::string_view line);

/// Quotes a field only when it contains a comma, quote, or leading/trailing space.
std::string escape_field(std::string_view field);

/// printf-style %.*g formatting; used for every real number written to text outputs.
std::string format_real(double value, int significant_digits = 12);

std::string trim(std::string_view s);

}  // namespace idnet::csv
