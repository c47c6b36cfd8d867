#pragma once

// Grid files.
//
// Layout (version 1):
//   line 1  "SCVTFV-GRID"
//   line 2  one-line JSON header: version, level, cells, triangles, density,
//           lloyd_tol, lloyd_iterations, lloyd_movement
//   body    cells * 3 float64 generator coordinates (x, y, z per cell), then
//           triangles * 3 int32 vertex ids (CCW seen from outside), all
//           little-endian
//
// Derived geometry is not stored; load_grid rebuilds it with
// precompute_geometry, which is deterministic.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "scvtfv/errors.hpp"
#include "scvtfv/grid.hpp"

namespace scvtfv {

inline constexpr const char* kGridMagic = "SCVTFV-GRID";
inline constexpr int kGridFormatVersion = 1;

namespace detail {

template <class T>
void write_le(std::ostream& os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T read_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw FormatError("grid file is truncated");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace detail

inline void save_grid(const Grid& grid, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  nlohmann::json header = {
      {"version", kGridFormatVersion},
      {"level", grid.level},
      {"cells", grid.centers.size()},
      {"triangles", grid.triangles.size()},
      {"density", grid.density_tag},
      {"lloyd_tol", grid.lloyd_tol},
      {"lloyd_iterations", grid.lloyd_iterations},
      {"lloyd_movement", grid.lloyd_movement},
  };
  os << kGridMagic << '\n' << header.dump() << '\n';
  for (const Vec3& c : grid.centers) {
    for (int k = 0; k < 3; ++k) detail::write_le<double>(os, c[k]);
  }
  for (const Triangle& t : grid.triangles) {
    for (int k = 0; k < 3; ++k) detail::write_le<std::int32_t>(os, t[k]);
  }
  if (!os) throw IoError("failed writing " + path.string());
}

inline Grid load_grid(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::string magic, header_line;
  if (!std::getline(is, magic) || magic != kGridMagic) {
    throw FormatError(path.string() + " is not a grid file");
  }
  if (!std::getline(is, header_line)) throw FormatError("grid file is truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad grid header: ") + e.what());
  }
  Grid g;
  std::size_t ncells = 0, ntris = 0;
  try {
    if (header.at("version").get<int>() != kGridFormatVersion) {
      throw FormatError("unsupported grid format version " + header.at("version").dump());
    }
    g.level = header.at("level").get<int>();
    ncells = header.at("cells").get<std::size_t>();
    ntris = header.at("triangles").get<std::size_t>();
    g.density_tag = header.at("density").get<std::string>();
    g.lloyd_tol = header.at("lloyd_tol").get<double>();
    g.lloyd_iterations = header.at("lloyd_iterations").get<int>();
    g.lloyd_movement = header.at("lloyd_movement").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad grid header: ") + e.what());
  }
  if (ntris != 2 * ncells - 4) throw FormatError("cell and triangle counts are inconsistent");
  g.centers.resize(ncells);
  for (Vec3& c : g.centers) {
    for (int k = 0; k < 3; ++k) c[k] = detail::read_le<double>(is);
  }
  g.triangles.resize(ntris);
  for (Triangle& t : g.triangles) {
    for (int k = 0; k < 3; ++k) {
      t[k] = detail::read_le<std::int32_t>(is);
      if (t[k] < 0 || std::size_t(t[k]) >= ncells) throw FormatError("triangle index out of range");
    }
  }
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes in grid file");
  precompute_geometry(g);
  return g;
}

}  // namespace scvtfv
