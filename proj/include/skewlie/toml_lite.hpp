#pragma once

#include <iosfwd>
#include <json.hpp>
#include <string>

namespace skewlie {

/// Reader for the subset of TOML used by experiment configs: [table] and
/// [table.sub] headers, key = value pairs, basic strings, integers, floats,
/// booleans, single-line arrays of those, and # comments.
/// Throws ConfigError with the offending line number.
nlohmann::json parse_toml(std::istream& is);
nlohmann::json parse_toml_file(const std::string& path);

}  // namespace skewlie
