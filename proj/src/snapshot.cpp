#include "ymh/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ymh {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

namespace {

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw StructuralError("truncated snapshot");
  return v;
}

}  // namespace

void write_field(std::ostream& os, const Field& u, std::uint64_t config_hash) {
  os.write("YMH1", 4);
  std::uint32_t family = 0;
  if (!u.is_scalar()) family = u.kind().family == Family::SO ? 1 : 2;
  put<std::uint32_t>(os, family);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(u.matrix_n()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(u.grid()->N()));
  put<double>(os, u.grid()->spec().L);
  put<std::uint32_t>(os, u.repr() == Repr::Spectral ? 1u : 0u);
  put<std::uint64_t>(os, config_hash);
  const int entries = u.entries();
  std::vector<double> row(2 * static_cast<std::size_t>(entries));
  for (std::size_t p = 0; p < u.points(); ++p) {
    for (int e = 0; e < entries; ++e) {
      row[2 * e] = u.block(e)[p].real();
      row[2 * e + 1] = u.block(e)[p].imag();
    }
    os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  if (!os) throw StructuralError("snapshot write failed");
}

Field read_field(std::istream& is, GridPtr grid, SnapshotHeader* header) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "YMH1", 4) != 0) throw StructuralError("bad snapshot magic");
  SnapshotHeader h;
  h.family = get<std::uint32_t>(is);
  h.n = get<std::uint32_t>(is);
  h.N = get<std::uint32_t>(is);
  h.L = get<double>(is);
  h.repr = get<std::uint32_t>(is);
  h.config_hash = get<std::uint64_t>(is);
  if (h.family > 2 || h.repr > 1 || h.n == 0) throw StructuralError("bad snapshot header");
  if (!grid) {
    GridSpec spec;
    spec.N = static_cast<int>(h.N);
    spec.L = h.L;
    grid = Grid::make(spec);
  } else if (grid->N() != static_cast<int>(h.N) || grid->spec().L != h.L) {
    throw StructuralError("snapshot grid does not match");
  }
  const Repr repr = h.repr == 1 ? Repr::Spectral : Repr::Physical;
  Field u = h.family == 0 ? Field::scalar(grid, repr)
                          : Field::algebra(grid,
                                           h.family == 1 ? AlgebraKind::so(static_cast<int>(h.n))
                                                         : AlgebraKind::su(static_cast<int>(h.n)),
                                           repr);
  const int entries = u.entries();
  std::vector<double> row(2 * static_cast<std::size_t>(entries));
  for (std::size_t p = 0; p < u.points(); ++p) {
    is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
    if (!is) throw StructuralError("truncated snapshot");
    for (int e = 0; e < entries; ++e) u.block(e)[p] = cplx(row[2 * e], row[2 * e + 1]);
  }
  if (header) *header = h;
  return u;
}

void write_bundle(const std::string& path, const std::vector<NamedField>& fields,
                  std::uint64_t config_hash) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  for (const auto& f : fields) write_field(os, f.field, config_hash);
  std::ofstream man(path + ".manifest");
  if (!man) throw ConfigError("cannot open manifest for " + path);
  man << "# config_hash " << std::hex << std::setw(16) << std::setfill('0') << config_hash << std::dec << "\n";
  man << "components " << fields.size() << "\n";
  for (const auto& f : fields) man << f.name << "\n";
}

std::vector<NamedField> read_bundle(const std::string& path, GridPtr grid) {
  std::ifstream man(path + ".manifest");
  if (!man) throw ConfigError("missing manifest for " + path);
  std::string line;
  std::vector<std::string> names;
  std::size_t count = 0;
  while (std::getline(man, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("components ", 0) == 0) {
      count = std::stoul(line.substr(11));
      continue;
    }
    names.push_back(line);
  }
  if (names.size() != count) throw StructuralError("manifest component count mismatch");
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path);
  std::vector<NamedField> out;
  for (const auto& n : names) out.push_back({n, read_field(is, grid)});
  return out;
}

}  // namespace ymh
