#pragma once

#include "pspin/errors.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace pspin::cli {

/// Unknown key, malformed line or value of the wrong type.
class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config_error"; }
};

enum class ValueType { integer, real, text, integer_list, real_list };

struct KeySpec {
  std::string key;  ///< "section.name"
  ValueType type;
  std::string default_value;
  std::string doc;
};

/// Every accepted key with its type, default and one-line description.
const std::vector<KeySpec>& schema();

/// Flat key-value configuration with [section] headers:
///
///     [model]
///     p = 3
///     N = 32
///
/// Lists are comma-separated. '#' starts a comment. Keys outside the schema are
/// rejected, naming the key.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& origin = "<config>");
  static Config load(const std::filesystem::path& path);

  /// Sets "section.name" to `value` after checking key and type.
  void set(const std::string& key, const std::string& value);
  /// Applies a "section.name=value" override.
  void set_assignment(const std::string& assignment);

  bool explicitly_set(const std::string& key) const { return values_.count(key) > 0; }
  std::string raw(const std::string& key) const;

  int get_int(const std::string& key) const;
  double get_real(const std::string& key) const;
  std::string get_text(const std::string& key) const;
  std::vector<int> get_ints(const std::string& key) const;
  std::vector<double> get_reals(const std::string& key) const;

  /// "key = value" lines for every schema key, sorted, defaults included.
  std::vector<std::string> canonical_lines() const;
  /// FNV-1a 64 of the canonical lines and the tool version.
  std::uint64_t hash() const;
  std::string hash_hex() const;

 private:
  std::map<std::string, std::string> values_;
};

/// Tool version, part of every output header and of the config hash.
const char* tool_version();

}  // namespace pspin::cli
