#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace openden::cli {

// The flat TOML subset used by run configs: [section] headers, key = value
// with strings, integers, floats, booleans and one-line arrays, and # comments.
using TomlArray = std::vector<std::variant<std::int64_t, double, std::string>>;
using TomlValue = std::variant<bool, std::int64_t, double, std::string, TomlArray>;

struct TomlEntry {
  TomlValue value;
  std::size_t line = 0;
};

// section -> key -> value. Keys before any header live in section "".
using TomlDocument = std::map<std::string, std::map<std::string, TomlEntry>>;

// Throws ConfigError with `source` and the line number on malformed input
// or duplicate keys.
TomlDocument parse_toml(const std::string& text, const std::string& source = "<config>");

}  // namespace openden::cli
