#include "dfuse/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>

#include "dfuse/densify.hpp"
#include "dfuse/energy.hpp"
#include "dfuse/io.hpp"
#include "dfuse/metrics.hpp"
#include "dfuse/solver.hpp"

namespace dfuse::cli {

namespace {

using nlohmann::json;

// Confidence source spec: const:<v> | file:<path> | oracle:<gt-path>.
struct ConfSource {
  enum class Kind { Default, Constant, File, Oracle } kind = Kind::Default;
  double value = 1.0;
  std::string path;
};

ConfSource parse_conf_source(const std::string& spec) {
  ConfSource src;
  if (spec.empty()) return src;
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "const") {
    src.kind = ConfSource::Kind::Constant;
    try {
      src.value = std::stod(tail);
    } catch (const std::exception&) {
      throw RangeError("bad confidence constant '" + tail + "'");
    }
  } else if (head == "file") {
    src.kind = ConfSource::Kind::File;
    src.path = tail;
  } else if (head == "oracle") {
    src.kind = ConfSource::Kind::Oracle;
    src.path = tail;
  } else {
    throw RangeError("confidence source must be const:<v>, file:<path> or "
                     "oracle:<gt-path>, got '" + spec + "'");
  }
  return src;
}

ImageGrid sparse_confidence_from(const ConfSource& src,
                                 const SparseDepthMap& base,
                                 const ConfidenceParams& params) {
  ImageGrid conf;
  switch (src.kind) {
    case ConfSource::Kind::Default:
      return base.confidence;
    case ConfSource::Kind::Constant:
      conf = constant_confidence(base.log_depth.width, base.log_depth.height,
                                 src.value);
      break;
    case ConfSource::Kind::File:
      conf = read_grid(src.path);
      break;
    case ConfSource::Kind::Oracle: {
      const ImageGrid gt = read_grid(src.path);
      return oracle_sparse_confidence(base, to_log_depth(gt), params);
    }
  }
  for (int i = 0; i < conf.size(); ++i) {
    if (!base.mask.is_valid(i)) conf[i] = 0.0;
  }
  return conf;
}

ImageGrid dense_confidence_from(const ConfSource& src,
                                const ImageGrid& dense_log,
                                const ConfidenceParams& params) {
  switch (src.kind) {
    case ConfSource::Kind::Default:
    case ConfSource::Kind::Constant: {
      const double v = src.kind == ConfSource::Kind::Default ? 1.0 : src.value;
      return constant_confidence(dense_log.width, dense_log.height, v);
    }
    case ConfSource::Kind::File:
      return read_grid(src.path);
    case ConfSource::Kind::Oracle: {
      const ImageGrid gt = read_grid(src.path);
      ConfidenceParams p = ConfidenceParams::dense_defaults();
      p.lambda = params.lambda;
      return oracle_dense_confidence(dense_log, to_log_depth(gt), p);
    }
  }
  throw Error("unreachable");
}

void emit_rows(const std::vector<EvalResult>& rows, const std::string& format,
               std::ostream& out) {
  if (format == "json") {
    for (const auto& r : rows) {
      json j{{"metric", r.metric},
             {"value", r.value},
             {"value_squared", r.value_squared},
             {"pixel_count", r.pixel_count},
             {"mask", r.mask_description}};
      out << j.dump() << "\n";
    }
  } else {
    out << "metric                          value      value^2    pixels  mask\n";
    char buf[256];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof(buf), "%-28s %10.6f %10.6f %9d  %s\n",
                    r.metric.c_str(), r.value, r.value_squared, r.pixel_count,
                    r.mask_description.c_str());
      out << buf;
    }
  }
}

struct FuseCmd {
  std::string sparse_path, dense_path, out_path, report_out;
  std::string conf_sparse, conf_dense;
  std::string report_format = "table";
  FusionParams params;
  double conf_lambda = 2.0;

  int execute() {
    const PointList points = read_points(sparse_path);
    SparseDepthMap sparse = to_sparse_map(points);
    const ImageGrid dense_depth = read_grid(dense_path);
    if (dense_depth.width != sparse.log_depth.width ||
        dense_depth.height != sparse.log_depth.height) {
      throw ShapeError("sparse map is " +
                       std::to_string(sparse.log_depth.width) + "x" +
                       std::to_string(sparse.log_depth.height) +
                       " but dense map is " + std::to_string(dense_depth.width) +
                       "x" + std::to_string(dense_depth.height));
    }

    ConfidenceParams cp = ConfidenceParams::sparse_defaults();
    cp.lambda = conf_lambda;
    const ImageGrid cs =
        sparse_confidence_from(parse_conf_source(conf_sparse), sparse, cp);
    const ImageGrid dense_log = to_log_depth(dense_depth);
    const ImageGrid cd =
        dense_confidence_from(parse_conf_source(conf_dense), dense_log, cp);

    sparse = SparseDepthMap(sparse.log_depth, sparse.mask, cs);
    const DensePrediction dense(dense_log, cd);
    const FusionProblem problem = assemble(sparse, dense, params);
    const SolveReport report = solve_cg(problem);
    write_grid(out_path, from_log_depth(report.solution));

    json j{{"iterations", report.iterations},
           {"final_relative_residual", report.final_relative_residual},
           {"converged", report.converged},
           {"wall_time_sec", report.wall_time_sec},
           {"pixels", report.solution.size()}};
    if (!report_out.empty()) {
      std::ofstream out(report_out);
      if (!out) throw Error("cannot write '" + report_out + "'");
      out << j.dump(2) << "\n";
    }
    if (report_format == "json") {
      std::cout << j.dump() << "\n";
    } else {
      std::cout << "fused " << out_path << ": " << report.iterations
                << " iterations, residual " << report.final_relative_residual
                << (report.converged ? " (converged)" : " (NOT converged)")
                << ", " << report.wall_time_sec << " s\n";
    }
    return report.converged ? 0 : 1;
  }
};

struct EvalCmd {
  std::string pred_path, gt_path, mask_path;
  std::string conf_pred_path, conf_target_path;
  std::string report_format = "table";

  int execute() {
    const ImageGrid pred = read_grid(pred_path);
    const ImageGrid gt = read_grid(gt_path);
    ValidityMask mask(pred.width, pred.height, true);
    std::string mask_desc = "all pixels";
    if (!mask_path.empty()) {
      mask = grid_to_mask(read_grid(mask_path));
      mask_desc = mask_path;
    }
    std::vector<EvalResult> rows;
    const double sie =
        scale_invariant_error(to_log_depth(pred), to_log_depth(gt), mask);
    rows.push_back({"scale_invariant_error", sie, sie * sie, mask.count(),
                    mask_desc});
    const double rmse = rmse_depth(pred, gt, mask);
    rows.push_back({"rmse_depth_m", rmse, rmse * rmse, mask.count(), mask_desc});
    if (!conf_pred_path.empty() && !conf_target_path.empty()) {
      const double loss = confidence_loss(read_grid(conf_pred_path),
                                          read_grid(conf_target_path), mask);
      rows.push_back({"confidence_loss", loss, loss * loss, mask.count(),
                      mask_desc});
    }
    emit_rows(rows, report_format, std::cout);
    return 0;
  }
};

struct SynthCmd {
  std::string out_dir;
  SceneSpec scene;
  DegradationSpec degradation;
  int blur_radius = 2;
  DenseBias bias{0.05, 1.0};
  double remove_frac = 0.0;
  int crop_min = 0, crop_max = 0;

  int execute() {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const Scene sc = generate_scene(scene);
    SparseObservation obs =
        degrade_to_sparse(sc.depth, sc.intensity, degradation);
    const DensePrediction dense = degrade_to_dense(sc.depth, blur_radius, bias);

    if (remove_frac > 0.0 || crop_max > 0) {
      const RemovalResult rr =
          remove_frac > 0.0
              ? remove_fraction(obs.map.mask, remove_frac, scene.rng_seed + 1)
              : crop_rectangle(obs.map.mask, scene.rng_seed + 1, crop_min,
                               crop_max);
      ImageGrid conf = obs.map.confidence;
      for (int i = 0; i < conf.size(); ++i) {
        if (!rr.remaining.is_valid(i)) conf[i] = 0.0;
      }
      obs.map = SparseDepthMap(obs.map.log_depth, rr.remaining, conf);
      write_grid((fs::path(out_dir) / "eval_mask.csv").string(),
                 mask_to_grid(rr.removed));
    }

    write_grid((fs::path(out_dir) / "gt.pfm").string(), sc.depth);
    write_grid((fs::path(out_dir) / "intensity.pfm").string(), sc.intensity);
    write_grid((fs::path(out_dir) / "dense.pfm").string(),
               from_log_depth(dense.log_depth));
    write_points((fs::path(out_dir) / "sparse.txt").string(),
                 to_point_list(obs.map));
    write_grid((fs::path(out_dir) / "outliers.csv").string(),
               mask_to_grid(obs.outliers));
    std::cout << "wrote scene (seed " << scene.rng_seed << ", "
              << obs.map.mask.count() << " sparse points) to " << out_dir
              << "\n";
    return 0;
  }
};

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::string item;
  std::istringstream ss(csv);
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw RangeError("bad numeric list entry '" + item + "'");
    }
  }
  if (out.empty()) throw RangeError("empty value list");
  return out;
}

struct SweepCmd {
  SweepConfig config;
  std::string beta_list = "1", gamma_list = "1";
  std::string out_path;

  int execute() {
    config.betas = parse_list(beta_list);
    config.gammas = parse_list(gamma_list);
    const auto points = run_sweep(config);
    std::ofstream out(out_path);
    if (!out) throw Error("cannot write '" + out_path + "'");
    out << "beta,gamma,scale_invariant_error\n";
    char buf[96];
    for (const auto& p : points) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", p.beta, p.gamma,
                    p.median_error);
      out << buf;
    }
    std::cout << "wrote " << points.size() << " sweep rows to " << out_path
              << "\n";
    return 0;
  }
};

}  // namespace

std::vector<SweepPoint> run_sweep(const SweepConfig& config) {
  std::vector<SweepPoint> out;
  struct Instance {
    SparseDepthMap sparse;
    DensePrediction dense;
    ImageGrid gt_log;
  };
  std::vector<Instance> corpus;
  for (int s = 0; s < config.seed_count; ++s) {
    SceneSpec scene = config.scene;
    scene.rng_seed = config.base_seed + static_cast<std::uint64_t>(s);
    DegradationSpec deg = config.degradation;
    deg.rng_seed = scene.rng_seed ^ 0x5DEECE66DULL;
    const Scene sc = generate_scene(scene);
    SparseObservation obs = degrade_to_sparse(sc.depth, sc.intensity, deg);
    Instance inst;
    inst.gt_log = to_log_depth(sc.depth);
    inst.dense = degrade_to_dense(sc.depth, config.blur_radius, config.bias);
    if (config.oracle_confidence) {
      const ImageGrid conf =
          oracle_sparse_confidence(obs.map, inst.gt_log, config.conf_params);
      inst.sparse = SparseDepthMap(obs.map.log_depth, obs.map.mask, conf);
    } else {
      inst.sparse = std::move(obs.map);
    }
    corpus.push_back(std::move(inst));
  }

  const ValidityMask all(config.scene.width, config.scene.height, true);
  for (const double beta : config.betas) {
    for (const double gamma : config.gammas) {
      FusionParams params;
      params.alpha = config.alpha;
      params.beta = beta;
      params.gamma = gamma;
      params.cg_tolerance = config.cg_tolerance;
      params.cg_max_iters = config.cg_max_iters;
      std::vector<double> errors;
      for (const auto& inst : corpus) {
        const FusionProblem problem =
            assemble(inst.sparse, inst.dense, params);
        const SolveReport report = solve_cg(problem);
        errors.push_back(
            scale_invariant_error(report.solution, inst.gt_log, all));
      }
      std::sort(errors.begin(), errors.end());
      const std::size_t n = errors.size();
      const double median = n % 2 ? errors[n / 2]
                                  : 0.5 * (errors[n / 2 - 1] + errors[n / 2]);
      out.push_back({beta, gamma, median});
    }
  }
  return out;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Sparse-to-dense depth fusion via a confidence-weighted CRF"};
  app.require_subcommand(1);

  FuseCmd fuse_cmd;
  auto* fuse = app.add_subcommand(
      "fuse", "Inpaint a sparse depth map guided by a dense prediction");
  fuse->add_option("--sparse", fuse_cmd.sparse_path, "Sparse point list file")
      ->required();
  fuse->add_option("--dense", fuse_cmd.dense_path,
                   "Dense depth prediction grid (meters)")
      ->required();
  fuse->add_option("--out", fuse_cmd.out_path, "Fused depth output grid")
      ->required();
  fuse->add_option("--alpha", fuse_cmd.params.alpha, "Unary weight")
      ->capture_default_str();
  fuse->add_option("--beta", fuse_cmd.params.beta, "Fully-connected weight")
      ->required();
  fuse->add_option("--gamma", fuse_cmd.params.gamma, "Local grid weight")
      ->required();
  fuse->add_option("--epsilon", fuse_cmd.params.epsilon,
                   "Dense-confidence regularizer")
      ->capture_default_str();
  fuse->add_option("--tol", fuse_cmd.params.cg_tolerance,
                   "CG relative residual tolerance")
      ->capture_default_str();
  fuse->add_option("--max-iters", fuse_cmd.params.cg_max_iters,
                   "CG iteration cap")
      ->capture_default_str();
  fuse->add_flag("--gauge-fixed", fuse_cmd.params.gauge_fixed,
                 "Solve the alpha=0 system with the mean pinned to the dense "
                 "prediction");
  fuse->add_flag("!--no-precond", fuse_cmd.params.jacobi_preconditioner,
                 "Disable the Jacobi preconditioner");
  fuse->add_option("--conf-sparse", fuse_cmd.conf_sparse,
                   "Sparse confidence: const:<v> | file:<path> | "
                   "oracle:<gt-path> (default: point-list confidences)");
  fuse->add_option("--conf-dense", fuse_cmd.conf_dense,
                   "Dense confidence source (default const:1)");
  fuse->add_option("--conf-lambda", fuse_cmd.conf_lambda,
                   "Contrast of oracle confidence targets")
      ->capture_default_str();
  fuse->add_option("--report", fuse_cmd.report_format, "json|table")
      ->check(CLI::IsMember({"json", "table"}));
  fuse->add_option("--report-out", fuse_cmd.report_out,
                   "Write the solve report as JSON to this path");

  EvalCmd eval_cmd;
  auto* eval = app.add_subcommand("eval", "Compare a depth map to ground truth");
  eval->add_option("--pred", eval_cmd.pred_path, "Predicted depth grid")
      ->required();
  eval->add_option("--gt", eval_cmd.gt_path, "Ground-truth depth grid")
      ->required();
  eval->add_option("--mask", eval_cmd.mask_path,
                   "Evaluation mask grid (nonzero = evaluate)");
  eval->add_option("--conf-pred", eval_cmd.conf_pred_path,
                   "Predicted confidence grid (enables confidence_loss)");
  eval->add_option("--conf-target", eval_cmd.conf_target_path,
                   "Target confidence grid");
  eval->add_option("--report", eval_cmd.report_format, "json|table")
      ->check(CLI::IsMember({"json", "table"}));

  SynthCmd synth_cmd;
  auto* synth = app.add_subcommand(
      "synth", "Generate a synthetic scene with degraded observations");
  synth->add_option("--out-dir", synth_cmd.out_dir, "Output directory")
      ->required();
  synth->add_option("--width", synth_cmd.scene.width)->capture_default_str();
  synth->add_option("--height", synth_cmd.scene.height)->capture_default_str();
  synth->add_option("--planes", synth_cmd.scene.plane_count)
      ->capture_default_str();
  synth->add_option("--depth-min", synth_cmd.scene.depth_min)
      ->capture_default_str();
  synth->add_option("--depth-max", synth_cmd.scene.depth_max)
      ->capture_default_str();
  synth->add_option("--seed", synth_cmd.scene.rng_seed)->capture_default_str();
  synth->add_option("--keep-fraction", synth_cmd.degradation.keep_fraction)
      ->capture_default_str();
  synth->add_option("--outlier-fraction",
                    synth_cmd.degradation.outlier_fraction)
      ->capture_default_str();
  synth->add_option("--outlier-scale-min",
                    synth_cmd.degradation.outlier_scale_min)
      ->capture_default_str();
  synth->add_option("--outlier-scale-max",
                    synth_cmd.degradation.outlier_scale_max)
      ->capture_default_str();
  synth->add_option("--global-scale", synth_cmd.degradation.global_scale)
      ->capture_default_str();
  synth->add_option("--noise-sigma", synth_cmd.degradation.noise_sigma_log)
      ->capture_default_str();
  synth->add_flag("--gradient-biased",
                  synth_cmd.degradation.gradient_biased_sampling,
                  "Cluster sparse samples at high image gradient");
  synth->add_option("--blur-radius", synth_cmd.blur_radius)
      ->capture_default_str();
  synth->add_option("--bias-slope", synth_cmd.bias.slope)
      ->capture_default_str();
  synth->add_option("--bias-ref", synth_cmd.bias.ref_depth)
      ->capture_default_str();
  synth->add_option("--remove-fraction", synth_cmd.remove_frac,
                    "Randomly remove this fraction of sparse points and emit "
                    "the removed set as eval_mask.csv");
  synth->add_option("--crop-min", synth_cmd.crop_min,
                    "Minimum crop rectangle side");
  synth->add_option("--crop-max", synth_cmd.crop_max,
                    "Maximum crop rectangle side (enables cropping)");

  SweepCmd sweep_cmd;
  auto* sweep = app.add_subcommand(
      "sweep", "Fuse+eval over a (beta, gamma) grid on a synthetic corpus");
  sweep->add_option("--out", sweep_cmd.out_path, "Output CSV")->required();
  sweep->add_option("--alpha", sweep_cmd.config.alpha)->capture_default_str();
  sweep->add_option("--betas", sweep_cmd.beta_list, "Comma-separated betas")
      ->capture_default_str();
  sweep->add_option("--gammas", sweep_cmd.gamma_list, "Comma-separated gammas")
      ->capture_default_str();
  sweep->add_option("--seeds", sweep_cmd.config.seed_count,
                    "Corpus size (scene seeds)")
      ->capture_default_str();
  sweep->add_option("--base-seed", sweep_cmd.config.base_seed)
      ->capture_default_str();
  sweep->add_option("--width", sweep_cmd.config.scene.width)
      ->capture_default_str();
  sweep->add_option("--height", sweep_cmd.config.scene.height)
      ->capture_default_str();
  sweep->add_option("--planes", sweep_cmd.config.scene.plane_count)
      ->capture_default_str();
  sweep->add_option("--keep-fraction",
                    sweep_cmd.config.degradation.keep_fraction)
      ->capture_default_str();
  sweep->add_option("--outlier-fraction",
                    sweep_cmd.config.degradation.outlier_fraction)
      ->capture_default_str();
  sweep->add_option("--noise-sigma",
                    sweep_cmd.config.degradation.noise_sigma_log)
      ->capture_default_str();
  sweep->add_option("--global-scale", sweep_cmd.config.degradation.global_scale)
      ->capture_default_str();
  sweep->add_option("--blur-radius", sweep_cmd.config.blur_radius)
      ->capture_default_str();
  sweep->add_option("--bias-slope", sweep_cmd.config.bias.slope)
      ->capture_default_str();
  sweep->add_flag("--oracle-conf", sweep_cmd.config.oracle_confidence,
                  "Use ground-truth oracle confidences for the sparse map");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*fuse) return fuse_cmd.execute();
    if (*eval) return eval_cmd.execute();
    if (*synth) return synth_cmd.execute();
    if (*sweep) return sweep_cmd.execute();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace dfuse::cli
