#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dfuse/io.hpp"
#include "dfuse/metrics.hpp"

using namespace dfuse;
namespace fs = std::filesystem;

namespace {

// DFUSE_CLI_PATH is injected by the build; tests drive the real binary.
const std::string kCli = DFUSE_CLI_PATH;

int run_cli(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path temp_dir(const std::string& leaf) {
  const fs::path p = fs::temp_directory_path() / ("dfuse_cli_" + leaf);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("synth -> fuse -> eval happy path") {
  const fs::path dir = temp_dir("happy");
  REQUIRE(run_cli("synth --out-dir " + dir.string() +
                  " --seed 11 --keep-fraction 0.25 --noise-sigma 0.02") == 0);
  REQUIRE(fs::exists(dir / "gt.pfm"));
  REQUIRE(fs::exists(dir / "dense.pfm"));
  REQUIRE(fs::exists(dir / "sparse.txt"));

  const fs::path fused = dir / "fused.pfm";
  const fs::path report = dir / "report.json";
  REQUIRE(run_cli("fuse --sparse " + (dir / "sparse.txt").string() +
                  " --dense " + (dir / "dense.pfm").string() + " --out " +
                  fused.string() + " --beta 1 --gamma 1 --report-out " +
                  report.string()) == 0);
  REQUIRE(fs::exists(fused));
  REQUIRE(fs::exists(report));
  {
    std::ifstream in(report);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str().find("\"converged\": true") != std::string::npos);
  }

  // the fused map should beat the raw dense prediction against ground truth
  const ImageGrid gt = read_grid((dir / "gt.pfm").string());
  const ImageGrid dense = read_grid((dir / "dense.pfm").string());
  const ImageGrid out = read_grid(fused.string());
  const ValidityMask all(gt.width, gt.height, true);
  const ImageGrid gt_log = to_log_depth(gt);
  CHECK(scale_invariant_error(to_log_depth(out), gt_log, all) <=
        scale_invariant_error(to_log_depth(dense), gt_log, all) + 1e-12);

  CHECK(run_cli("eval --pred " + fused.string() + " --gt " +
                (dir / "gt.pfm").string()) == 0);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_cli("") == 2);                      // missing subcommand
  CHECK(run_cli("fuse") == 2);                  // missing required flags
  CHECK(run_cli("frobnicate") == 2);            // unknown subcommand
  CHECK(run_cli("eval --pred a.pfm") == 2);     // missing --gt
  CHECK(run_cli("--help") == 0);                // help is not an error
  CHECK(run_cli("fuse --help") == 0);
}

TEST_CASE("bad inputs exit with code 2") {
  const fs::path dir = temp_dir("bad");
  {
    std::ofstream out(dir / "garbage.pfm");
    out << "not a pfm at all";
  }
  {
    std::ofstream out(dir / "points.txt");
    out << "4 4\n1 1 2.0\n";
  }
  CHECK(run_cli("fuse --sparse " + (dir / "points.txt").string() + " --dense " +
                (dir / "garbage.pfm").string() +
                " --out /tmp/x.pfm --beta 1 --gamma 1") == 2);
  CHECK(run_cli("fuse --sparse " + (dir / "missing.txt").string() +
                " --dense " + (dir / "garbage.pfm").string() +
                " --out /tmp/x.pfm --beta 1 --gamma 1") == 2);
  CHECK(run_cli("eval --pred " + (dir / "garbage.pfm").string() + " --gt " +
                (dir / "garbage.pfm").string()) == 2);
}

TEST_CASE("confidence source flags") {
  const fs::path dir = temp_dir("conf");
  REQUIRE(run_cli("synth --out-dir " + dir.string() +
                  " --seed 12 --keep-fraction 0.25 --outlier-fraction 0.1") ==
          0);
  const std::string base = "fuse --sparse " + (dir / "sparse.txt").string() +
                           " --dense " + (dir / "dense.pfm").string() +
                           " --beta 1 --gamma 1 --out ";

  SUBCASE("const and oracle sources are accepted") {
    CHECK(run_cli(base + (dir / "f1.pfm").string() +
                  " --conf-sparse const:0.5") == 0);
    CHECK(run_cli(base + (dir / "f2.pfm").string() + " --conf-sparse oracle:" +
                  (dir / "gt.pfm").string()) == 0);
  }
  SUBCASE("oracle confidence downweights outliers and lowers the error") {
    REQUIRE(run_cli(base + (dir / "raw.pfm").string()) == 0);
    REQUIRE(run_cli(base + (dir / "orc.pfm").string() + " --conf-sparse oracle:" +
                    (dir / "gt.pfm").string()) == 0);
    const ImageGrid gt_log = to_log_depth(read_grid((dir / "gt.pfm").string()));
    const ValidityMask all(gt_log.width, gt_log.height, true);
    const double raw = scale_invariant_error(
        to_log_depth(read_grid((dir / "raw.pfm").string())), gt_log, all);
    const double orc = scale_invariant_error(
        to_log_depth(read_grid((dir / "orc.pfm").string())), gt_log, all);
    CHECK(orc < raw);
  }
  SUBCASE("malformed source spec is a usage error") {
    CHECK(run_cli(base + (dir / "f3.pfm").string() +
                  " --conf-sparse bogus:1") == 2);
    CHECK(run_cli(base + (dir / "f4.pfm").string() +
                  " --conf-sparse const:nope") == 2);
  }
}

TEST_CASE("sweep emits a CSV over the requested grid") {
  const fs::path dir = temp_dir("sweep");
  const fs::path out = dir / "sweep.csv";
  REQUIRE(run_cli("sweep --out " + out.string() +
                  " --betas 0,1 --gammas 0.5 --seeds 2 --width 32 --height 24 "
                  "--keep-fraction 0.3 --noise-sigma 0.02") == 0);
  std::ifstream in(out);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "beta,gamma,scale_invariant_error");
  int rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 2);  // 2 betas x 1 gamma
}

TEST_CASE("synth removal protocols emit an evaluation mask") {
  const fs::path dir = temp_dir("removal");
  REQUIRE(run_cli("synth --out-dir " + dir.string() +
                  " --seed 13 --keep-fraction 0.3 --remove-fraction 0.5") == 0);
  REQUIRE(fs::exists(dir / "eval_mask.csv"));
  const ValidityMask removed =
      grid_to_mask(read_grid((dir / "eval_mask.csv").string()));
  CHECK(removed.count() > 0);
  // removed points must be absent from the surviving sparse list
  const PointList pl = read_points((dir / "sparse.txt").string());
  const SparseDepthMap survivors = to_sparse_map(pl);
  for (int i = 0; i < removed.width * removed.height; ++i) {
    if (removed.is_valid(i)) CHECK(!survivors.mask.is_valid(i));
  }
}
