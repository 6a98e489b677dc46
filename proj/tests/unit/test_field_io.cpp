#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "mscg/field_gen.hpp"
#include "mscg/field_io.hpp"

using namespace mscg;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mscg_field_io_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(FieldIo, BinaryRoundTripIsBitIdentical) {
  const Grid2D g(17, 9, 0.25, 0.5);
  const auto spec = CorrelationSpec::oriented(CorrelationModel::kPowerLaw, 2.0, 1.0, 0.3, 0, 2);
  const CellField k = generate_lognormal_field(g, spec, 8);
  const fs::path p = scratch("roundtrip.bin");
  export_field(k, p);
  EXPECT_EQ(fs::file_size(p), 16u + 8u * g.size());
  const CellField back = import_field(p, FieldFormat::kBinary, 0.25, 0.5);
  EXPECT_EQ(back.grid(), g);
  ASSERT_EQ(back.size(), k.size());
  for (std::size_t n = 0; n < k.size(); ++n) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(back.values()[n]),
              std::bit_cast<std::uint64_t>(k.values()[n]));
  }
}

TEST(FieldIo, CsvLayoutIsRowMajor) {
  const CellField k(Grid2D(2, 2), Vector{1, 2, 3, 4});
  const fs::path p = scratch("small.csv");
  export_field(k, p, FieldFormat::kCsv);
  std::ifstream in(p);
  std::string l0, l1, extra;
  std::getline(in, l0);
  std::getline(in, l1);
  EXPECT_EQ(l0, "1,2");
  EXPECT_EQ(l1, "3,4");
  EXPECT_FALSE(std::getline(in, extra) && !extra.empty());
  const CellField back = import_field(p, FieldFormat::kCsv);
  EXPECT_EQ(back.values(), k.values());
  EXPECT_EQ(back.grid().nx, 2);
}

TEST(FieldIo, HeaderCarriesDimensions) {
  const CellField k(Grid2D(5, 3), 1.0);
  const fs::path p = scratch("header.bin");
  export_field(k, p);
  std::ifstream in(p, std::ios::binary);
  char magic[8];
  std::uint32_t nx = 0, ny = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&nx), 4);
  in.read(reinterpret_cast<char*>(&ny), 4);
  EXPECT_EQ(std::string(magic, 8), "MSCGFLD1");
  EXPECT_EQ(nx, 5u);
  EXPECT_EQ(ny, 3u);
}

TEST(FieldIo, RejectsBadInput) {
  const fs::path p = scratch("bad.bin");
  {
    std::ofstream out(p, std::ios::binary);
    out << "NOTMAGIC" << std::string(8, '\0');
  }
  EXPECT_THROW(import_field(p), std::runtime_error);
  const fs::path t = scratch("truncated.bin");
  export_field(CellField(Grid2D(4, 4), 1.0), t);
  fs::resize_file(t, 40);
  EXPECT_THROW(import_field(t), std::runtime_error);
  const fs::path c = scratch("ragged.csv");
  {
    std::ofstream out(c);
    out << "1,2\n3\n";
  }
  EXPECT_THROW(import_field(c, FieldFormat::kCsv), std::runtime_error);
  EXPECT_THROW(import_field(scratch("missing.bin")), std::runtime_error);
}
