#pragma once

// Field exports. CSV rows are (x, y, T, value). The binary layout is:
//   u64 nx | u64 ny | u64 nt | x nodes f64[nx] | y nodes f64[ny]
//   | times f64[nt] | values f64[nt * nx * ny], x-major per level
// all little-endian 64-bit.

#include <string>

#include "svol/grid.hpp"

namespace svol::io {

void write_field_csv(const std::string& path, const grid::FieldSeries& f);
void write_field_binary(const std::string& path, const grid::FieldSeries& f);
grid::FieldSeries read_field_binary(const std::string& path);

// rows (y, T, I, defect) with defect = x_ref * (1 - I)
void write_profile_csv(const std::string& path, const grid::ProfileSeries& p,
                       double x_ref);

}  // namespace svol::io
