#pragma once

#include <filesystem>
#include <iosfwd>

#include "thmm/simulator.hpp"

namespace thmm {

// CSV layout: header `k,y` or `k,y,x`, one row per time index, k starting at 1.
void write_series_csv(std::ostream& os, const TimeSeries& series);
TimeSeries read_series_csv(std::istream& is);

// Binary layout (all little-endian):
//   8 bytes magic "THMMSER1", u64 n, u64 column count (1 or 2),
//   then n f64 values of y followed, when present, by n f64 values of x.
void write_series_binary(std::ostream& os, const TimeSeries& series);
TimeSeries read_series_binary(std::istream& is);

/// Dispatches on extension: `.bin` selects the binary layout, anything else CSV.
void save_series(const std::filesystem::path& path, const TimeSeries& series);
TimeSeries load_series(const std::filesystem::path& path);

}  // namespace thmm
