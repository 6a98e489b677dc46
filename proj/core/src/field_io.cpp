#include "mscg/field_io.hpp"

#include <array>
#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace mscg {

namespace {

constexpr std::array<char, 8> kMagic{'M', 'S', 'C', 'G', 'F', 'L', 'D', '1'};

template <typename T>
void put_le(std::ostream& os, T value) {
  auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> bytes{};
  is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (!is) throw std::runtime_error("import_field: truncated file");
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  return std::bit_cast<T>(bytes);
}

}  // namespace

void export_field(const CellField& field, const std::filesystem::path& path,
                  FieldFormat format) {
  const Grid2D& g = field.grid();
  if (format == FieldFormat::kBinary) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("export_field: cannot open " + path.string());
    os.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.nx));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.ny));
    for (double v : field.values()) put_le<double>(os, v);
    if (!os) throw std::runtime_error("export_field: write failed for " + path.string());
    return;
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("export_field: cannot open " + path.string());
  os.precision(17);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (i > 0) os << ',';
      os << field(i, j);
    }
    os << '\n';
  }
  if (!os) throw std::runtime_error("export_field: write failed for " + path.string());
}

CellField import_field(const std::filesystem::path& path, FieldFormat format, double dx,
                       double dy) {
  if (format == FieldFormat::kBinary) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("import_field: cannot open " + path.string());
    std::array<char, 8> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kMagic) {
      throw std::runtime_error("import_field: bad magic in " + path.string());
    }
    const auto nx = get_le<std::uint32_t>(is);
    const auto ny = get_le<std::uint32_t>(is);
    Grid2D grid(static_cast<int>(nx), static_cast<int>(ny), dx, dy);
    Vector values(grid.size());
    for (double& v : values) v = get_le<double>(is);
    return CellField(grid, std::move(values));
  }

  std::ifstream is(path);
  if (!is) throw std::runtime_error("import_field: cannot open " + path.string());
  std::vector<Vector> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    Vector row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error("import_field: ragged CSV in " + path.string());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("import_field: empty CSV " + path.string());
  Grid2D grid(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()), dx, dy);
  Vector values;
  values.reserve(grid.size());
  for (const auto& row : rows) values.insert(values.end(), row.begin(), row.end());
  return CellField(grid, std::move(values));
}

}  // namespace mscg
