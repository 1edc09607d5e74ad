#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace thmm::cli {

/// Subset of TOML used by experiment configs: [table] headers, bare keys,
/// strings, integers, floats, booleans and flat arrays of those scalars.
/// Comments start with '#'. Keys are addressed as "table.key".
using TomlScalar = std::variant<bool, std::int64_t, double, std::string>;
using TomlValue = std::variant<TomlScalar, std::vector<TomlScalar>>;

class TomlError : public std::runtime_error {
 public:
  TomlError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class TomlDocument {
 public:
  static TomlDocument parse(std::istream& in);
  static TomlDocument parse_file(const std::string& path);

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  bool is_array(const std::string& key) const;
  std::vector<std::string> keys() const;

  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::vector<std::uint64_t> get_uint_array(const std::string& key) const;

 private:
  const TomlScalar& scalar(const std::string& key) const;
  std::map<std::string, TomlValue> values_;
};

}  // namespace thmm::cli
