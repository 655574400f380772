#pragma once

// Small text helpers shared by the CSV writers and readers.

#include <string>
#include <string_view>
#include <vector>

namespace hwdyn::detail {

/// Shortest decimal form that parses back to the same double; "nan",
/// "inf" and "-inf" for non-finite values.
std::string format_double(double v);

/// Parses a whole field as a double (accepts the non-finite spellings
/// above). Throws DataError naming `context` on failure.
double parse_double(std::string_view s, const std::string& context);

/// Comma split, no quoting (fields never contain commas).
std::vector<std::string> split_csv(std::string_view line);

std::string_view trim(std::string_view s);

std::string join_csv(const std::vector<std::string>& fields);

}  // namespace hwdyn::detail
