#include "svol/field_io.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace svol::io {

namespace {

void append_double(std::string& s, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  s.append(buf, res.ptr);
}

void write_u64(std::ofstream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::ifstream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void write_doubles(std::ofstream& os, const std::vector<double>& v) {
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_doubles(std::ifstream& is, std::vector<double>& v, std::size_t n) {
  v.resize(n);
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
}

}  // namespace

void write_field_csv(const std::string& path, const grid::FieldSeries& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  std::string line = "x,y,T,value\n";
  os << line;
  for (std::size_t n = 0; n < f.levels.size(); ++n) {
    for (std::size_t i = 0; i < f.grid.nx(); ++i) {
      for (std::size_t j = 0; j < f.grid.ny(); ++j) {
        line.clear();
        append_double(line, f.grid.x[i]);
        line.push_back(',');
        append_double(line, f.grid.y[j]);
        line.push_back(',');
        append_double(line, f.times[n]);
        line.push_back(',');
        append_double(line, f.levels[n].at(f.grid, i, j));
        line.push_back('\n');
        os << line;
      }
    }
  }
}

void write_field_binary(const std::string& path, const grid::FieldSeries& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_u64(os, f.grid.nx());
  write_u64(os, f.grid.ny());
  write_u64(os, f.levels.size());
  write_doubles(os, f.grid.x);
  write_doubles(os, f.grid.y);
  write_doubles(os, f.times);
  for (const auto& lvl : f.levels) write_doubles(os, lvl.v);
}

grid::FieldSeries read_field_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  grid::FieldSeries f;
  const std::uint64_t nx = read_u64(is);
  const std::uint64_t ny = read_u64(is);
  const std::uint64_t nt = read_u64(is);
  if (!is || nx == 0 || ny == 0 || nt == 0 || nx * ny > (1ull << 32))
    throw std::runtime_error("malformed field file " + path);
  read_doubles(is, f.grid.x, nx);
  read_doubles(is, f.grid.y, ny);
  read_doubles(is, f.times, nt);
  f.levels.resize(nt);
  for (auto& lvl : f.levels) read_doubles(is, lvl.v, nx * ny);
  if (!is) throw std::runtime_error("truncated field file " + path);
  if (f.times.size() >= 2) {
    f.grid.dt = f.times[1] - f.times[0];
    f.grid.T = f.times.back();
  }
  return f;
}

void write_profile_csv(const std::string& path, const grid::ProfileSeries& p,
                       double x_ref) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "y,T,I,defect\n";
  std::string line;
  for (std::size_t n = 0; n < p.levels.size(); ++n) {
    for (std::size_t j = 0; j < p.y.size(); ++j) {
      line.clear();
      append_double(line, p.y[j]);
      line.push_back(',');
      append_double(line, p.times[n]);
      line.push_back(',');
      append_double(line, p.levels[n][j]);
      line.push_back(',');
      append_double(line, x_ref * (1.0 - p.levels[n][j]));
      line.push_back('\n');
      os << line;
    }
  }
}

}  // namespace svol::io
