#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ymh/grid.hpp"

namespace ymh {

/// Binary field snapshot. Header: magic "YMH1", uint32 family (0 scalar,
/// 1 so, 2 su), uint32 n, uint32 N, float64 L, uint32 representation,
/// uint64 config hash. Body: for each grid point in row-major order, each
/// matrix entry in row-major order, real then imaginary part. All values are
/// little-endian.
struct SnapshotHeader {
  std::uint32_t family = 0;
  std::uint32_t n = 1;
  std::uint32_t N = 0;
  double L = 0.0;
  std::uint32_t repr = 0;
  std::uint64_t config_hash = 0;
};

void write_field(std::ostream& os, const Field& u, std::uint64_t config_hash);

/// Reads one field. If `grid` is null a grid is created from the header
/// (two-thirds dealiasing); otherwise the header must match it.
Field read_field(std::istream& is, GridPtr grid, SnapshotHeader* header = nullptr);

struct NamedField {
  std::string name;
  Field field;
};

/// Writes `path` (concatenated snapshots) and `path + ".manifest"` listing
/// the component order and the config hash.
void write_bundle(const std::string& path, const std::vector<NamedField>& fields,
                  std::uint64_t config_hash);
std::vector<NamedField> read_bundle(const std::string& path, GridPtr grid);

}  // namespace ymh
