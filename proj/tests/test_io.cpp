#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "dfuse/io.hpp"
#include "oracles.hpp"

using namespace dfuse;

TEST_CASE("format selection by extension") {
  CHECK(grid_format_for_path("out/depth.pfm") == GridFormat::PFM);
  CHECK(grid_format_for_path("depth.PFM") == GridFormat::PFM);
  CHECK(grid_format_for_path("depth.csv") == GridFormat::CSV);
  CHECK(grid_format_for_path("depth") == GridFormat::CSV);
}

TEST_CASE("PFM round trip within float32 precision") {
  std::mt19937_64 rng(61);
  const ImageGrid g = oracles::random_grid(rng, 7, 5, 0.1, 50.0);
  std::stringstream ss;
  write_grid(ss, g, GridFormat::PFM);
  const ImageGrid back = read_grid(ss, GridFormat::PFM);
  REQUIRE(back.width == 7);
  REQUIRE(back.height == 5);
  for (int i = 0; i < g.size(); ++i) {
    CHECK(back[i] ==
          doctest::Approx(static_cast<float>(g[i])).epsilon(1e-7));
  }
}

TEST_CASE("hand-built big-endian PFM fixture") {
  // 2x1, positive scale = big endian; rows bottom-up (single row here).
  // values 1.0f, -2.5f big-endian
  std::string data = "Pf\n2 1\n1.0\n";
  const unsigned char one[4] = {0x3f, 0x80, 0x00, 0x00};
  const unsigned char mtwofive[4] = {0xc0, 0x20, 0x00, 0x00};
  data.append(reinterpret_cast<const char*>(one), 4);
  data.append(reinterpret_cast<const char*>(mtwofive), 4);
  std::istringstream ss(data);
  const ImageGrid g = read_grid(ss, GridFormat::PFM);
  REQUIRE(g.width == 2);
  REQUIRE(g.height == 1);
  CHECK(g[0] == doctest::Approx(1.0));
  CHECK(g[1] == doctest::Approx(-2.5));
}

TEST_CASE("PFM row order is bottom-up") {
  ImageGrid g(1, 2);
  g.at(0, 0) = 1.0;  // top row
  g.at(0, 1) = 2.0;  // bottom row
  std::stringstream ss;
  write_grid(ss, g, GridFormat::PFM);
  const std::string s = ss.str();
  // payload is the last 8 bytes; first stored float must be the bottom row
  REQUIRE(s.size() >= 8);
  float f0;
  std::memcpy(&f0, s.data() + s.size() - 8, 4);
  const ImageGrid back = read_grid(ss, GridFormat::PFM);
  CHECK(back.at(0, 0) == doctest::Approx(1.0));
  CHECK(back.at(0, 1) == doctest::Approx(2.0));
  // little-endian host writes negative scale and native floats
  CHECK(std::abs(f0) == doctest::Approx(2.0));
}

TEST_CASE("malformed PFM inputs throw ParseError") {
  auto expect_parse_error = [](const std::string& s) {
    std::istringstream ss(s);
    CHECK_THROWS_AS(read_grid(ss, GridFormat::PFM), ParseError);
  };
  expect_parse_error("");                      // empty
  expect_parse_error("PF\n2 1\n-1.0\n");       // color header
  expect_parse_error("Pf\n0 1\n-1.0\n");       // zero dimension
  expect_parse_error("Pf\n2 1\n-1.0\n\x00");   // truncated payload
  expect_parse_error("Pf\n2 1\n0\nxxxxxxxx");  // zero scale
  expect_parse_error("Pf\nbogus\n");           // unparsable dims
}

TEST_CASE("CSV round trip is exact") {
  std::mt19937_64 rng(62);
  const ImageGrid g = oracles::random_grid(rng, 6, 4, -3.0, 3.0);
  std::stringstream ss;
  write_grid(ss, g, GridFormat::CSV);
  const ImageGrid back = read_grid(ss, GridFormat::CSV);
  REQUIRE(back.width == 6);
  REQUIRE(back.height == 4);
  for (int i = 0; i < g.size(); ++i) CHECK(back[i] == g[i]);  // %.17g exact
}

TEST_CASE("malformed CSV inputs throw ParseError") {
  auto expect_parse_error = [](const std::string& s) {
    std::istringstream ss(s);
    CHECK_THROWS_AS(read_grid(ss, GridFormat::CSV), ParseError);
  };
  expect_parse_error("");
  expect_parse_error("2,2\n1,2\n");            // missing row
  expect_parse_error("2,2\n1,2\n3\n");         // short row
  expect_parse_error("2,2\n1,2\n3,x\n");       // non-numeric cell
  expect_parse_error("2,-2\n");                // negative dimension
  expect_parse_error("999999,999999\n");       // absurd allocation
}

TEST_CASE("point list round trip, comments, and dedup") {
  SUBCASE("write/read round trip preserves records") {
    PointList pl;
    pl.width = 10;
    pl.height = 8;
    pl.records = {{1, 2, 3.5, std::nullopt}, {4, 5, 1.25, 0.75}};
    std::stringstream ss;
    write_points(ss, pl);
    const PointList back = read_points(ss);
    REQUIRE(back.records.size() == 2);
    CHECK(back.width == 10);
    CHECK(back.height == 8);
    CHECK(back.records[0].x == 1);
    CHECK(back.records[0].depth == 3.5);
    CHECK(!back.records[0].confidence.has_value());
    CHECK(back.records[1].confidence.value() == 0.75);
  }
  SUBCASE("comments and blank lines are skipped") {
    std::istringstream ss(
        "# header comment\n4 4\n\n1 1 2.0 # trailing comment\n# mid\n2 2 "
        "3.0 0.5\n");
    const PointList pl = read_points(ss);
    REQUIRE(pl.records.size() == 2);
    CHECK(pl.records[0].depth == 2.0);
    CHECK(pl.records[1].confidence.value() == 0.5);
  }
  SUBCASE("duplicate pixels keep the smallest depth") {
    PointList pl;
    pl.width = 4;
    pl.height = 4;
    pl.records = {{1, 1, 5.0, 0.3}, {1, 1, 2.0, 0.9}, {1, 1, 3.0, 0.1}};
    const SparseDepthMap m = to_sparse_map(pl);
    CHECK(m.mask.count() == 1);
    CHECK(m.log_depth[m.mask.width * 1 + 1] ==
          doctest::Approx(std::log(2.0)));
    CHECK(m.confidence[m.mask.width * 1 + 1] == 0.9);
  }
  SUBCASE("missing confidence defaults to 1") {
    PointList pl;
    pl.width = 3;
    pl.height = 3;
    pl.records = {{0, 0, 2.0, std::nullopt}};
    CHECK(to_sparse_map(pl).confidence[0] == 1.0);
  }
  SUBCASE("bad records throw ParseError") {
    auto expect_parse_error = [](const std::string& s) {
      std::istringstream ss(s);
      CHECK_THROWS_AS(read_points(ss), ParseError);
    };
    expect_parse_error("4 4\n7 1 2.0\n");      // x out of bounds
    expect_parse_error("4 4\n1 -1 2.0\n");     // y out of bounds
    expect_parse_error("4 4\n1 1\n");          // missing depth
    expect_parse_error("4 4\n1 1 0.0\n");      // non-positive depth
    expect_parse_error("4 4\n1 1 2.0 1.5\n");  // confidence out of range
    expect_parse_error("nonsense\n");
  }
  SUBCASE("sparse map to point list and back") {
    ImageGrid log_d(4, 3, 0.0);
    ValidityMask mask(4, 3, false);
    ImageGrid conf(4, 3, 0.0);
    mask.set(5, true);
    log_d[5] = std::log(2.5);
    conf[5] = 0.5;
    const SparseDepthMap m(log_d, mask, conf);
    const PointList pl = to_point_list(m);
    REQUIRE(pl.records.size() == 1);
    const SparseDepthMap back = to_sparse_map(pl);
    CHECK(back.mask.count() == 1);
    CHECK(back.log_depth[5] == doctest::Approx(std::log(2.5)).epsilon(1e-12));
    CHECK(back.confidence[5] == 0.5);
  }
}

TEST_CASE("mask/grid conversion") {
  ValidityMask m(3, 2, false);
  m.set(0, true);
  m.set(4, true);
  const ImageGrid g = mask_to_grid(m);
  CHECK(g[0] == 1.0);
  CHECK(g[1] == 0.0);
  const ValidityMask back = grid_to_mask(g);
  for (int i = 0; i < 6; ++i) CHECK(back.is_valid(i) == m.is_valid(i));
}

TEST_CASE("random byte soup never crashes the readers") {
  std::mt19937_64 rng(63);
  for (int t = 0; t < 200; ++t) {
    std::string junk(rng() % 200, '\0');
    for (auto& c : junk) c = static_cast<char>(rng() & 0xff);
    for (auto fmt : {GridFormat::PFM, GridFormat::CSV}) {
      std::istringstream ss(junk);
      try {
        (void)read_grid(ss, fmt);
      } catch (const Error&) {
        // malformed input must surface as a library error, nothing else
      }
    }
    std::istringstream ss(junk);
    try {
      (void)read_points(ss);
    } catch (const Error&) {
    }
  }
  CHECK(true);  // reaching here without a crash/foreign exception is the test
}
