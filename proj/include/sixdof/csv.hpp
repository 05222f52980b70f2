#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sixdof::csv {

// Splits one comma-separated line. Quoting is not supported; fields are trimmed.
std::vector<std::string> split(std::string_view line);

// Full-field parse; empty on malformed text. Accepts "nan"/"inf".
std::optional<double> to_double(std::string_view field);
std::optional<long long> to_int(std::string_view field);

// Shortest representation that round-trips through to_double.
std::string fmt_double(double v);

}  // namespace sixdof::csv
