#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dfuse/core.hpp"

namespace dfuse {

enum class GridFormat { PFM, CSV };

// Format by file extension: .pfm -> PFM, anything else -> CSV.
GridFormat grid_format_for_path(const std::string& path);

// PFM: "Pf" header, dims, scale/endianness float, float32 rows bottom-up.
// CSV: "width,height" header line, then row-major rows at full precision.
// Malformed or truncated input throws ParseError, never a partial grid.
ImageGrid read_grid(std::istream& in, GridFormat format);
ImageGrid read_grid(const std::string& path);
void write_grid(std::ostream& out, const ImageGrid& grid, GridFormat format);
void write_grid(const std::string& path, const ImageGrid& grid);

struct PointListRecord {
  int x = 0;
  int y = 0;
  double depth = 0.0;
  std::optional<double> confidence;
};

struct PointList {
  int width = 0;
  int height = 0;
  std::vector<PointListRecord> records;
};

// Text format: "width height" header, then one "x y depth [confidence]"
// record per line. '#' starts a comment. Out-of-bounds records throw
// ParseError naming the record.
PointList read_points(std::istream& in);
PointList read_points(const std::string& path);
void write_points(std::ostream& out, const PointList& points);
void write_points(const std::string& path, const PointList& points);

// Duplicate pixels are reduced keeping the smallest depth, with a warning.
// Records without confidence default to 1.
SparseDepthMap to_sparse_map(const PointList& points);
PointList to_point_list(const SparseDepthMap& sparse);

// Masks travel as grids of 0/1.
ImageGrid mask_to_grid(const ValidityMask& mask);
ValidityMask grid_to_mask(const ImageGrid& grid, double threshold = 0.5);

}  // namespace dfuse
