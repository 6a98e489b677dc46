#pragma once

/// @file field_io.hpp
/// @brief Cell field dumps for external plotting.
///
/// Binary layout: 8-byte magic "MSCGFLD1", uint32 nx, uint32 ny (16-byte
/// header), then nx*ny little-endian IEEE-754 doubles in row-major order.
/// CSV layout: one line per grid row j = 0..ny-1, nx comma-separated values.

#include <filesystem>

#include "mscg/grid.hpp"

namespace mscg {

enum class FieldFormat { kBinary, kCsv };

void export_field(const CellField& field, const std::filesystem::path& path,
                  FieldFormat format = FieldFormat::kBinary);

/// Cell widths are not stored in either format; the caller supplies them.
CellField import_field(const std::filesystem::path& path,
                       FieldFormat format = FieldFormat::kBinary, double dx = 1.0,
                       double dy = 1.0);

}  // namespace mscg
