#include "toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <fstream>

namespace thmm::cli {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Drops a trailing comment, leaving '#' inside strings alone.
std::string strip_comment(const std::string& s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

bool is_bare_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  }
  return true;
}

TomlScalar parse_scalar(const std::string& raw, std::size_t line) {
  const std::string s = trim(raw);
  if (s.empty()) throw TomlError(line, "missing value");
  if (s == "true") return true;
  if (s == "false") return false;
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') throw TomlError(line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i] == '\\' && i + 2 < s.size()) {
        const char c = s[++i];
        out += c == 'n' ? '\n' : c == 't' ? '\t' : c;
      } else {
        out += s[i];
      }
    }
    return out;
  }
  std::string digits;
  for (char c : s) {
    if (c != '_') digits += c;
  }
  const bool looks_float = digits.find_first_of(".eE") != std::string::npos ||
                           digits == "inf" || digits == "nan";
  if (!looks_float) {
    std::int64_t v = 0;
    const char* first = digits.data() + (digits.front() == '+' ? 1 : 0);
    const auto [ptr, ec] = std::from_chars(first, digits.data() + digits.size(), v);
    if (ec == std::errc() && ptr == digits.data() + digits.size()) return v;
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(digits, &used);
    if (used == digits.size()) return v;
  } catch (const std::exception&) {
  }
  throw TomlError(line, "cannot parse value '" + s + "'");
}

std::vector<std::string> split_array(const std::string& body, std::size_t line) {
  std::vector<std::string> items;
  std::string cur;
  bool in_string = false;
  for (char c : body) {
    if (c == '"') in_string = !in_string;
    if (c == ',' && !in_string) {
      items.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (in_string) throw TomlError(line, "unterminated string in array");
  if (!trim(cur).empty()) items.push_back(cur);
  return items;
}

const char* type_name(const TomlScalar& v) {
  switch (v.index()) {
    case 0: return "bool";
    case 1: return "integer";
    case 2: return "float";
    default: return "string";
  }
}

}  // namespace

TomlError::TomlError(std::size_t line, const std::string& what)
    : std::runtime_error("config line " + std::to_string(line) + ": " + what), line_(line) {}

TomlDocument TomlDocument::parse(std::istream& in) {
  TomlDocument doc;
  std::string table;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3) throw TomlError(line, "bad table header");
      table = trim(s.substr(1, s.size() - 2));
      if (!is_bare_key(table)) throw TomlError(line, "unsupported table name '" + table + "'");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw TomlError(line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    if (!is_bare_key(key)) throw TomlError(line, "unsupported key '" + key + "'");
    const std::string full = table.empty() ? key : table + "." + key;
    if (doc.values_.count(full)) throw TomlError(line, "duplicate key '" + full + "'");
    const std::string value = trim(s.substr(eq + 1));
    if (!value.empty() && value.front() == '[') {
      if (value.back() != ']') throw TomlError(line, "arrays must fit on one line");
      std::vector<TomlScalar> arr;
      for (const auto& item : split_array(value.substr(1, value.size() - 2), line)) {
        arr.push_back(parse_scalar(item, line));
      }
      doc.values_[full] = std::move(arr);
    } else {
      doc.values_[full] = parse_scalar(value, line);
    }
  }
  return doc;
}

TomlDocument TomlDocument::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  return parse(in);
}

std::vector<std::string> TomlDocument::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

const TomlScalar& TomlDocument::scalar(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::out_of_range("config: missing key '" + key + "'");
  if (const auto* s = std::get_if<TomlScalar>(&it->second)) return *s;
  throw std::invalid_argument("config: '" + key + "' is an array, expected a scalar");
}

bool TomlDocument::is_array(const std::string& key) const {
  const auto it = values_.find(key);
  return it != values_.end() && std::holds_alternative<std::vector<TomlScalar>>(it->second);
}

double TomlDocument::get_double(const std::string& key) const {
  const TomlScalar& v = scalar(key);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw std::invalid_argument("config: '" + key + "' is a " + type_name(v) + ", expected a number");
}

std::int64_t TomlDocument::get_int(const std::string& key) const {
  const TomlScalar& v = scalar(key);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  throw std::invalid_argument("config: '" + key + "' is a " + type_name(v) + ", expected an integer");
}

std::uint64_t TomlDocument::get_uint(const std::string& key) const {
  const std::int64_t v = get_int(key);
  if (v < 0) throw std::invalid_argument("config: '" + key + "' must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

bool TomlDocument::get_bool(const std::string& key) const {
  const TomlScalar& v = scalar(key);
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  throw std::invalid_argument("config: '" + key + "' is a " + type_name(v) + ", expected a bool");
}

std::string TomlDocument::get_string(const std::string& key) const {
  const TomlScalar& v = scalar(key);
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw std::invalid_argument("config: '" + key + "' is a " + type_name(v) + ", expected a string");
}

std::vector<std::uint64_t> TomlDocument::get_uint_array(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::out_of_range("config: missing key '" + key + "'");
  const auto* arr = std::get_if<std::vector<TomlScalar>>(&it->second);
  if (!arr) throw std::invalid_argument("config: '" + key + "' must be an array");
  std::vector<std::uint64_t> out;
  for (const auto& v : *arr) {
    const auto* i = std::get_if<std::int64_t>(&v);
    if (!i || *i < 0) {
      throw std::invalid_argument("config: '" + key + "' must hold nonnegative integers");
    }
    out.push_back(static_cast<std::uint64_t>(*i));
  }
  return out;
}

}  // namespace thmm::cli
