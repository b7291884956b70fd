#include "dfuse/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

namespace dfuse {

namespace {

constexpr int kMaxDim = 1 << 16;

[[noreturn]] void parse_fail(const std::string& msg) { throw ParseError(msg); }

void check_dims(long long w, long long h) {
  if (w <= 0 || h <= 0 || w > kMaxDim || h > kMaxDim) {
    parse_fail("bad grid dimensions " + std::to_string(w) + "x" +
               std::to_string(h));
  }
}

// One whitespace-delimited PFM header token; comments not part of the spec.
std::string pfm_token(std::istream& in) {
  std::string tok;
  if (!(in >> tok)) parse_fail("truncated PFM header");
  return tok;
}

std::uint32_t byteswap32(std::uint32_t v) {
  return ((v & 0xFF) << 24) | ((v & 0xFF00) << 8) | ((v >> 8) & 0xFF00) |
         (v >> 24);
}

ImageGrid read_pfm(std::istream& in) {
  const std::string magic = pfm_token(in);
  if (magic == "PF") parse_fail("color PFM not supported, expected 'Pf'");
  if (magic != "Pf") parse_fail("not a PFM file (bad magic '" + magic + "')");
  long long w = 0, h = 0;
  double scale = 0.0;
  try {
    w = std::stoll(pfm_token(in));
    h = std::stoll(pfm_token(in));
    scale = std::stod(pfm_token(in));
  } catch (const std::exception&) {
    parse_fail("malformed PFM header");
  }
  check_dims(w, h);
  if (scale == 0.0 || !std::isfinite(scale)) parse_fail("bad PFM scale");
  in.get();  // single whitespace byte terminating the header

  const bool file_little = scale < 0.0;
  const bool host_little = std::endian::native == std::endian::little;

  ImageGrid grid(static_cast<int>(w), static_cast<int>(h));
  std::vector<std::uint32_t> row(w);
  for (long long r = h - 1; r >= 0; --r) {  // PFM rows are bottom-up
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(w * 4));
    if (in.gcount() != static_cast<std::streamsize>(w * 4)) {
      parse_fail("truncated PFM pixel data at row " + std::to_string(r));
    }
    for (long long c = 0; c < w; ++c) {
      std::uint32_t bits = row[c];
      if (file_little != host_little) bits = byteswap32(bits);
      float f;
      std::memcpy(&f, &bits, 4);
      grid.values[r * w + c] = f;
    }
  }
  return grid;
}

void write_pfm(std::ostream& out, const ImageGrid& grid) {
  const bool host_little = std::endian::native == std::endian::little;
  out << "Pf\n" << grid.width << " " << grid.height << "\n"
      << (host_little ? "-1.0" : "1.0") << "\n";
  std::vector<float> row(grid.width);
  for (int r = grid.height - 1; r >= 0; --r) {
    for (int c = 0; c < grid.width; ++c) {
      row[c] = static_cast<float>(grid.values[r * grid.width + c]);
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(grid.width) * 4);
  }
}

ImageGrid read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) parse_fail("empty CSV file");
  long long w = 0, h = 0;
  {
    std::istringstream hs(line);
    std::string a, b;
    if (!std::getline(hs, a, ',') || !std::getline(hs, b)) {
      parse_fail("CSV header must be 'width,height', got '" + line + "'");
    }
    try {
      w = std::stoll(a);
      h = std::stoll(b);
    } catch (const std::exception&) {
      parse_fail("non-numeric CSV header '" + line + "'");
    }
  }
  check_dims(w, h);
  ImageGrid grid(static_cast<int>(w), static_cast<int>(h));
  for (long long r = 0; r < h; ++r) {
    if (!std::getline(in, line)) {
      parse_fail("truncated CSV: missing row " + std::to_string(r));
    }
    std::istringstream ls(line);
    std::string cell;
    for (long long c = 0; c < w; ++c) {
      if (!std::getline(ls, cell, ',')) {
        parse_fail("CSV row " + std::to_string(r) + " has fewer than " +
                   std::to_string(w) + " cells");
      }
      try {
        std::size_t pos = 0;
        grid.values[r * w + c] = std::stod(cell, &pos);
        while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
        if (pos != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        parse_fail("bad CSV value '" + cell + "' at row " + std::to_string(r) +
                   " col " + std::to_string(c));
      }
    }
  }
  return grid;
}

void write_csv(std::ostream& out, const ImageGrid& grid) {
  out << grid.width << "," << grid.height << "\n";
  char buf[64];
  for (int r = 0; r < grid.height; ++r) {
    for (int c = 0; c < grid.width; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", grid.values[r * grid.width + c]);
      out << (c ? "," : "") << buf;
    }
    out << "\n";
  }
}

}  // namespace

GridFormat grid_format_for_path(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos) {
    std::string ext = path.substr(dot + 1);
    for (char& ch : ext) ch = static_cast<char>(std::tolower(ch));
    if (ext == "pfm") return GridFormat::PFM;
  }
  return GridFormat::CSV;
}

ImageGrid read_grid(std::istream& in, GridFormat format) {
  return format == GridFormat::PFM ? read_pfm(in) : read_csv(in);
}

ImageGrid read_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) parse_fail("cannot open '" + path + "'");
  return read_grid(in, grid_format_for_path(path));
}

void write_grid(std::ostream& out, const ImageGrid& grid, GridFormat format) {
  if (format == GridFormat::PFM) {
    write_pfm(out, grid);
  } else {
    write_csv(out, grid);
  }
}

void write_grid(const std::string& path, const ImageGrid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  write_grid(out, grid, grid_format_for_path(path));
}

PointList read_points(std::istream& in) {
  PointList list;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    if (!have_header) {
      long long w, h;
      if (!(ls >> w >> h)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        parse_fail("line " + std::to_string(line_no) +
                   ": expected 'width height' header");
      }
      std::string rest;
      if (ls >> rest) {
        parse_fail("line " + std::to_string(line_no) +
                   ": trailing data after header");
      }
      check_dims(w, h);
      list.width = static_cast<int>(w);
      list.height = static_cast<int>(h);
      have_header = true;
      continue;
    }
    PointListRecord rec;
    double conf;
    if (!(ls >> rec.x >> rec.y >> rec.depth)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      parse_fail("line " + std::to_string(line_no) + ": malformed record '" +
                 line + "'");
    }
    if (ls >> conf) rec.confidence = conf;
    std::string rest;
    if (ls >> rest) {
      parse_fail("line " + std::to_string(line_no) + ": trailing data '" +
                 rest + "'");
    }
    if (rec.x < 0 || rec.x >= list.width || rec.y < 0 ||
        rec.y >= list.height) {
      parse_fail("line " + std::to_string(line_no) + ": pixel (" +
                 std::to_string(rec.x) + "," + std::to_string(rec.y) +
                 ") outside " + std::to_string(list.width) + "x" +
                 std::to_string(list.height));
    }
    if (!(rec.depth > 0.0) || !std::isfinite(rec.depth)) {
      parse_fail("line " + std::to_string(line_no) + ": non-positive depth");
    }
    if (rec.confidence &&
        !(*rec.confidence >= 0.0 && *rec.confidence <= 1.0)) {
      parse_fail("line " + std::to_string(line_no) +
                 ": confidence outside [0,1]");
    }
    list.records.push_back(rec);
  }
  if (!have_header) parse_fail("missing 'width height' header");
  return list;
}

PointList read_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) parse_fail("cannot open '" + path + "'");
  return read_points(in);
}

void write_points(std::ostream& out, const PointList& points) {
  out << points.width << " " << points.height << "\n";
  char buf[96];
  for (const auto& r : points.records) {
    if (r.confidence) {
      std::snprintf(buf, sizeof(buf), "%d %d %.17g %.17g\n", r.x, r.y, r.depth,
                    *r.confidence);
    } else {
      std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", r.x, r.y, r.depth);
    }
    out << buf;
  }
}

void write_points(const std::string& path, const PointList& points) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  write_points(out, points);
}

SparseDepthMap to_sparse_map(const PointList& points) {
  check_dims(points.width, points.height);
  ImageGrid log_depth(points.width, points.height, 0.0);
  ImageGrid conf(points.width, points.height, 0.0);
  ValidityMask mask(points.width, points.height, false);
  std::map<int, double> depth_at;
  for (const auto& r : points.records) {
    const int i = r.y * points.width + r.x;
    const auto it = depth_at.find(i);
    if (it != depth_at.end()) {
      std::cerr << "duplicate point at (" << r.x << "," << r.y
                << "): keeping smallest depth\n";
      if (r.depth >= it->second) continue;
    }
    depth_at[i] = r.depth;
    log_depth[i] = std::log(r.depth);
    conf[i] = r.confidence.value_or(1.0);
    mask.set(i, true);
  }
  return SparseDepthMap(std::move(log_depth), std::move(mask),
                        std::move(conf));
}

PointList to_point_list(const SparseDepthMap& sparse) {
  PointList list;
  list.width = sparse.log_depth.width;
  list.height = sparse.log_depth.height;
  for (int y = 0; y < list.height; ++y) {
    for (int x = 0; x < list.width; ++x) {
      const int i = y * list.width + x;
      if (!sparse.mask.is_valid(i)) continue;
      list.records.push_back(
          {x, y, std::exp(sparse.log_depth[i]), sparse.confidence[i]});
    }
  }
  return list;
}

ImageGrid mask_to_grid(const ValidityMask& mask) {
  ImageGrid grid(mask.width, mask.height, 0.0);
  for (int i = 0; i < mask.size(); ++i) grid[i] = mask.is_valid(i) ? 1.0 : 0.0;
  return grid;
}

ValidityMask grid_to_mask(const ImageGrid& grid, double threshold) {
  ValidityMask mask(grid.width, grid.height, false);
  for (int i = 0; i < grid.size(); ++i) mask.set(i, grid[i] > threshold);
  return mask;
}

}  // namespace dfuse
