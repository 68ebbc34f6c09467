// Ordered key-value report with a versioned text schema.
//
// Round-trip guarantee: parse_report(emit_report(r)) reproduces r exactly
// (same keys, same values, same order). Keys contain no whitespace; values
// are arbitrary single-line text.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace reachcert {

struct Report {
  std::vector<std::pair<std::string, std::string>> entries;

  void add(std::string key, std::string value) {
    entries.emplace_back(std::move(key), std::move(value));
  }
  void add_double(std::string key, double value);
  void add_int(std::string key, std::int64_t value);
  void add_uint(std::string key, std::uint64_t value);

  std::optional<std::string> find(const std::string& key) const {
    for (const auto& [k, v] : entries) {
      if (k == key) return v;
    }
    return std::nullopt;
  }
  bool operator==(const Report&) const = default;
};

std::string emit_report(const Report& report);
// Throws std::runtime_error on malformed input.
Report parse_report(const std::string& text);

}  // namespace reachcert
