#include "thmm/series_io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace thmm {

namespace {

constexpr char kMagic[8] = {'T', 'H', 'M', 'M', 'S', 'E', 'R', '1'};

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xffULL) << (8 * (7 - i));
    return out;
  }
}

void put_u64(std::ostream& os, std::uint64_t v) {
  v = to_le(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw std::runtime_error("series binary: truncated header");
  }
  return to_le(v);
}

void put_column(std::ostream& os, const std::vector<double>& col) {
  for (double d : col) put_u64(os, std::bit_cast<std::uint64_t>(d));
}

std::vector<double> get_column(std::istream& is, std::uint64_t n) {
  std::vector<double> col(n);
  for (auto& d : col) {
    std::uint64_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) {
      throw std::runtime_error("series binary: truncated data");
    }
    d = std::bit_cast<double>(to_le(v));
  }
  return col;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view s, std::size_t line_no) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("series csv: bad number '" + std::string(s) + "' on line " +
                             std::to_string(line_no));
  }
  return v;
}

}  // namespace

void write_series_csv(std::ostream& os, const TimeSeries& series) {
  series.validate();
  const bool latent = series.has_latent();
  os << (latent ? "k,y,x\n" : "k,y\n");
  os << std::setprecision(17);
  for (std::size_t k = 0; k < series.size(); ++k) {
    os << (k + 1) << ',' << series.y[k];
    if (latent) os << ',' << (*series.x)[k];
    os << '\n';
  }
}

TimeSeries read_series_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("series csv: empty input");
  const auto header = split_commas(trim(line));
  bool latent = false;
  if (header.size() == 3 && trim(header[0]) == "k" && trim(header[1]) == "y" &&
      trim(header[2]) == "x") {
    latent = true;
  } else if (!(header.size() == 2 && trim(header[0]) == "k" && trim(header[1]) == "y")) {
    throw std::runtime_error("series csv: header must be 'k,y' or 'k,y,x'");
  }

  TimeSeries out;
  if (latent) out.x.emplace();
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto cells = split_commas(body);
    if (cells.size() != header.size()) {
      throw std::runtime_error("series csv: wrong column count on line " + std::to_string(line_no));
    }
    out.y.push_back(parse_double(cells[1], line_no));
    if (latent) out.x->push_back(parse_double(cells[2], line_no));
  }
  return out;
}

void write_series_binary(std::ostream& os, const TimeSeries& series) {
  series.validate();
  os.write(kMagic, sizeof kMagic);
  put_u64(os, series.size());
  put_u64(os, series.has_latent() ? 2 : 1);
  put_column(os, series.y);
  if (series.has_latent()) put_column(os, *series.x);
}

TimeSeries read_series_binary(std::istream& is) {
  char magic[sizeof kMagic];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw std::runtime_error("series binary: bad magic");
  }
  const auto n = get_u64(is);
  const auto cols = get_u64(is);
  if (cols != 1 && cols != 2) throw std::runtime_error("series binary: column count must be 1 or 2");
  TimeSeries out;
  out.y = get_column(is, n);
  if (cols == 2) out.x = get_column(is, n);
  return out;
}

void save_series(const std::filesystem::path& path, const TimeSeries& series) {
  const bool binary = path.extension() == ".bin";
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  if (binary) {
    write_series_binary(os, series);
  } else {
    write_series_csv(os, series);
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

TimeSeries load_series(const std::filesystem::path& path) {
  const bool binary = path.extension() == ".bin";
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return binary ? read_series_binary(is) : read_series_csv(is);
}

}  // namespace thmm
