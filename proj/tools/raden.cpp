// raden: sample, project, reconstruct, baselines, manifold patches, bounds
// and the experiment tables from the command line.

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "raden/baselines.hpp"
#include "raden/bounds.hpp"
#include "raden/experiments.hpp"
#include "raden/io.hpp"
#include "raden/manifold.hpp"
#include "raden/pipeline.hpp"

using namespace raden;
using io::Json;

namespace {

constexpr int kExitFailure = 2;
constexpr int kExitUsage = 64;

struct GridFlags {
  std::vector<double> domain{0.0, 0.0, 100.0, 100.0};
  std::size_t pixels = 100;
  std::string truth;

  void add(CLI::App* cmd) {
    cmd->add_option("--domain", domain, "lo_x,lo_y,hi_x,hi_y (taken from --truth when omitted)")
        ->delimiter(',')
        ->expected(4);
    cmd->add_option("--pixels", pixels, "pixels per axis")->capture_default_str();
    cmd->add_option("--truth", truth, "ground-truth DensitySpec JSON; adds epsilon to the report");
  }

  std::optional<DensitySpec> truth_spec() const {
    if (truth.empty()) return std::nullopt;
    return io::read_density_spec(truth);
  }

  PixelGrid grid(const CLI::App* cmd, const std::optional<DensitySpec>& spec) const {
    require(pixels >= 2, "--pixels must be at least 2");
    if (spec && cmd->count("--domain") == 0) return table_grid(*spec, pixels);
    require(domain.size() == 4, "--domain takes four numbers");
    const double lo[2] = {domain[0], domain[1]};
    const double hi[2] = {domain[2], domain[3]};
    const std::size_t shape[2] = {pixels, pixels};
    return PixelGrid::covering(lo, hi, shape);
  }
};

struct GeometryFlags {
  std::string transform = "sph";
  std::size_t directions = 180;
  std::size_t offsets = 101;
  double min_radius = 4.0;
  double max_radius = 20.0;
  double radius_step = 1.0;
  std::string weight_mode = "density";
  std::string storage = "automatic";

  void add(CLI::App* cmd, bool with_transform = true) {
    if (with_transform)
      cmd->add_option("--transform", transform, "sph (balls) or hs (half spaces)")
          ->check(CLI::IsMember({"sph", "hs"}))
          ->capture_default_str();
    cmd->add_option("--directions", directions, "half-space directions K")->capture_default_str();
    cmd->add_option("--offsets", offsets, "half-space offsets per direction")->capture_default_str();
    cmd->add_option("--min-radius", min_radius, "smallest ball radius, pixel lengths")->capture_default_str();
    cmd->add_option("--max-radius", max_radius, "largest ball radius, pixel lengths")->capture_default_str();
    cmd->add_option("--radius-step", radius_step, "ball radius step, pixel lengths")->capture_default_str();
    cmd->add_option("--weight-mode", weight_mode, "density or paper_literal")
        ->check(CLI::IsMember({"density", "paper_literal"}))
        ->capture_default_str();
    cmd->add_option("--storage", storage, "automatic, explicit_sparse or matrix_free")
        ->check(CLI::IsMember({"automatic", "explicit_sparse", "matrix_free"}))
        ->capture_default_str();
  }

  void apply(PipelineConfig& cfg) const {
    cfg.transform = transform == "hs" ? RegionKind::half_space : RegionKind::ball;
    cfg.halfspace.directions = directions;
    cfg.halfspace.offsets = offsets;
    cfg.ball.min_radius = min_radius;
    cfg.ball.max_radius = max_radius;
    cfg.ball.radius_step = radius_step;
    cfg.assemble.weight_mode = weight_mode == "density" ? WeightMode::density : WeightMode::paper_literal;
    cfg.assemble.storage = storage == "explicit_sparse" ? Storage::explicit_sparse
                           : storage == "matrix_free"   ? Storage::matrix_free
                                                        : Storage::automatic;
  }
};

struct SolverFlags {
  std::string penalty = "tv";
  std::string selection = "upre";
  double lambda = 0.0;
  int probes = 20;
  int max_outer = 15;
  int max_inner = 80;
  bool exhaustive = false;
  std::uint64_t seed = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--penalty", penalty, "tv or tikhonov")->check(CLI::IsMember({"tv", "tikhonov"}))->capture_default_str();
    cmd->add_option("--selection", selection, "upre, gcv or fixed")
        ->check(CLI::IsMember({"upre", "gcv", "fixed"}))
        ->capture_default_str();
    cmd->add_option("--lambda", lambda, "absolute lambda for --selection fixed");
    cmd->add_option("--probes", probes, "Hutchinson probes for the trace")->capture_default_str();
    cmd->add_option("--max-outer", max_outer, "TV reweighting iterations")->capture_default_str();
    cmd->add_option("--max-inner", max_inner, "conjugate gradient iterations")->capture_default_str();
    cmd->add_flag("--exhaustive", exhaustive, "score every lambda instead of walking downhill");
    cmd->add_option("--solver-seed", seed, "probe seed")->capture_default_str();
  }

  RegConfig config() const {
    RegConfig reg;
    reg.penalty = penalty == "tikhonov" ? Penalty::tikhonov : Penalty::tv;
    reg.selection = selection == "gcv" ? Selection::gcv : Selection::upre;
    if (selection == "fixed") {
      require(lambda > 0.0, "--selection fixed needs --lambda > 0");
      reg.fixed_lambda = lambda;
    }
    reg.trace_probes = probes;
    reg.max_outer_iters = max_outer;
    reg.max_inner_iters = max_inner;
    reg.exhaustive_sweep = exhaustive;
    reg.seed = seed;
    return reg;
  }
};

void write_estimate(const std::string& prefix, const DensityEstimate& estimate) {
  io::write_text(prefix + ".csv", io::estimate_to_csv(estimate));
  io::write_text(prefix + ".pgm", io::estimate_to_pgm(estimate));
}

void add_truth(Json& report, const std::optional<DensitySpec>& truth, const DensityEstimate& estimate) {
  if (!truth) return;
  report["epsilon"] = relative_error(eval_density(*truth, estimate.grid).values, estimate.values);
}

void configure_threads() {
  if (const char* env = std::getenv("RADEN_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) fail(ErrorCode::validation, "RADEN_THREADS must be a positive integer");
    omp_set_num_threads(static_cast<int>(n));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density estimation from empirical Radon projections"};
  app.require_subcommand(1);

  // sample
  auto* sample = app.add_subcommand("sample", "draw an IID point cloud from a density spec");
  std::string spec_path, out_path;
  int density_id = 0;
  std::size_t m = 1000;
  std::uint64_t seed = 0;
  auto* spec_opt = sample->add_option("--spec", spec_path, "DensitySpec JSON");
  sample->add_option("--density", density_id, "built-in density 1-4")->excludes(spec_opt);
  sample->add_option("--m", m, "sample size")->capture_default_str();
  sample->add_option("--seed", seed, "master seed")->required();
  sample->add_option("--out", out_path, "point-cloud CSV")->required();

  // project
  auto* project = app.add_subcommand("project", "count points in every region and export the operator");
  std::string cloud_path, prefix;
  GridFlags project_grid;
  GeometryFlags project_geom;
  bool matrix_market = false, raw_counts = false;
  project->add_option("--cloud", cloud_path, "point-cloud CSV")->required();
  project_grid.add(project);
  project_geom.add(project);
  project->add_flag("--raw-counts", raw_counts, "write counts instead of fractions");
  project->add_flag("--matrix-market", matrix_market, "also write PREFIX.mtx (explicit storage)");
  project->add_option("--out-prefix", prefix, "output prefix")->required();

  // reconstruct
  auto* reconstruct = app.add_subcommand("reconstruct", "projections, operator and regularized inversion");
  GridFlags rec_grid;
  GeometryFlags rec_geom;
  SolverFlags rec_solver;
  reconstruct->add_option("--cloud", cloud_path, "point-cloud CSV")->required();
  rec_grid.add(reconstruct);
  rec_geom.add(reconstruct);
  rec_solver.add(reconstruct);
  reconstruct->add_option("--out-prefix", prefix, "writes PREFIX.csv, PREFIX.pgm, PREFIX.json")->required();

  // kde
  auto* kde_cmd = app.add_subcommand("kde", "Gaussian kernel density estimate");
  GridFlags kde_grid;
  double bandwidth = 0.0, rule_constant = 1.0;
  kde_cmd->add_option("--cloud", cloud_path, "point-cloud CSV")->required();
  kde_grid.add(kde_cmd);
  kde_cmd->add_option("--bandwidth", bandwidth, "fixed bandwidth (rule of thumb when omitted)");
  kde_cmd->add_option("--rule-constant", rule_constant, "c in c sigma m^(-1/(n+4))")->capture_default_str();
  kde_cmd->add_option("--out-prefix", prefix, "writes PREFIX.csv, PREFIX.pgm, PREFIX.json")->required();

  // fbp
  auto* fbp_cmd = app.add_subcommand("fbp", "sinc projections and filtered backprojection");
  GridFlags fbp_grid;
  FbpConfig fbp_cfg;
  bool fbp_best = false;
  fbp_cmd->add_option("--cloud", cloud_path, "point-cloud CSV")->required();
  fbp_grid.add(fbp_cmd);
  fbp_cmd->add_option("--bandwidth", fbp_cfg.h, "sinc bandwidth h, pixel lengths")->capture_default_str();
  fbp_cmd->add_option("--angles", fbp_cfg.angles, "projection angles")->capture_default_str();
  fbp_cmd->add_option("--s-step", fbp_cfg.s_step, "offset step, pixel lengths")->capture_default_str();
  fbp_cmd->add_flag("--best", fbp_best, "pick the best h in {0.5, 1, 2} against --truth");
  fbp_cmd->add_option("--out-prefix", prefix, "writes PREFIX.csv, PREFIX.pgm, PREFIX.json")->required();

  // patch
  auto* patch_cmd = app.add_subcommand("patch", "local PCA patches on a manifold sample");
  std::string queries_path;
  PatchConfig patch_cfg;
  GeometryFlags patch_geom;
  SolverFlags patch_solver;
  std::string patch_truth;
  double kappa = 0.0;
  patch_cmd->add_option("--cloud", cloud_path, "point-cloud CSV in R^d")->required();
  patch_cmd->add_option("--queries", queries_path, "query points CSV")->required();
  patch_cmd->add_option("--radius", patch_cfg.radius, "neighbourhood radius r")->capture_default_str();
  patch_cmd->add_option("--variance", patch_cfg.variance_percent, "variance percentage p")->capture_default_str();
  patch_cmd->add_option("--grid-size", patch_cfg.grid_size, "patch pixels per axis")->capture_default_str();
  patch_geom.add(patch_cmd);
  patch_solver.add(patch_cmd);
  patch_cmd->add_option("--truth", patch_truth, "planar DensitySpec of a paraboloid sample; adds epsilon");
  patch_cmd->add_option("--kappa", kappa, "paraboloid curvature for --truth");
  patch_cmd->add_option("--out-prefix", prefix, "writes PREFIX.json and PREFIX.csv")->required();

  // bounds
  auto* bounds_cmd = app.add_subcommand("bounds", "error bounds and the DKW coverage experiment");
  std::string kind;
  double bm = 1000, bK = 1, bp = 0.05, c = 1.0, rho = 1.0, data_bound = 0.0;
  int bn = 2;
  std::size_t trials = 200;
  bounds_cmd->add_option("kind", kind, "dkw, hs, sph, surface, reconstruction or coverage")
      ->required()
      ->check(CLI::IsMember({"dkw", "hs", "sph", "surface", "reconstruction", "coverage"}));
  bounds_cmd->add_option("--m", bm, "sample size")->capture_default_str();
  bounds_cmd->add_option("--K", bK, "number of regions or directions")->capture_default_str();
  bounds_cmd->add_option("--p", bp, "failure probability")->capture_default_str();
  bounds_cmd->add_option("--n", bn, "dimension")->capture_default_str();
  bounds_cmd->add_option("--c", c, "reconstruction constant placeholder")->capture_default_str();
  bounds_cmd->add_option("--rho", rho, "H^{1/2} norm placeholder")->capture_default_str();
  bounds_cmd->add_option("--data-bound", data_bound, "data error for the reconstruction bound");
  bounds_cmd->add_option("--spec", spec_path, "uniform-box DensitySpec for coverage (density 2 if omitted)");
  bounds_cmd->add_option("--trials", trials, "coverage trials")->capture_default_str();
  bounds_cmd->add_option("--seed", seed, "coverage seed");
  bounds_cmd->add_option("--out", out_path, "JSON report");

  // table
  auto* table_cmd = app.add_subcommand("table", "reproduce an experiment table");
  std::string table_id;
  std::vector<std::string> methods{"sph", "hs", "kde", "os"};
  std::vector<std::size_t> m_list{100, 500, 1000, 2000, 5000};
  std::size_t table_m = 0;
  bool verbose = false;
  GeometryFlags table_geom;
  SolverFlags table_solver;
  table_cmd->add_option("table", table_id, "T1, T2, patch or rate")
      ->required()
      ->check(CLI::IsMember({"T1", "T2", "patch", "rate"}));
  table_cmd->add_option("--trials", trials, "trials (default 20, patch 3, rate 5)");
  table_cmd->add_option("--seed", seed, "master seed")->required();
  table_cmd->add_option("--m", table_m, "sample size (default 1000, patch 5000)");
  table_cmd->add_option("--methods", methods, "subset of sph, hs, kde, os")->delimiter(',');
  table_cmd->add_option("--m-list", m_list, "sample sizes for rate")->delimiter(',');
  table_cmd->add_option("--density", density_id, "built-in density for rate (default 2)");
  table_geom.add(table_cmd);
  table_solver.add(table_cmd);
  table_cmd->add_flag("--verbose", verbose, "progress on stderr");
  table_cmd->add_option("--out", out_path, "JSON table")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << io::error_record("usage", e.what()).dump() << '\n';
    return kExitUsage;
  }

  try {
    configure_threads();

    if (*sample) {
      DensitySpec spec = spec_path.empty() ? builtin_density(density_id == 0 ? 1 : density_id) : io::read_density_spec(spec_path);
      io::write_cloud(out_path, sample_density(spec, m, seed));
      return 0;
    }

    if (*project) {
      const auto truth = project_grid.truth_spec();
      const PixelGrid grid = project_grid.grid(project, truth);
      PipelineConfig cfg;
      project_geom.apply(cfg);
      if (matrix_market) cfg.assemble.storage = Storage::explicit_sparse;
      const PointCloud cloud = io::read_cloud(cloud_path);
      const ProjectionGeometry geometry = make_geometry(grid, cfg);
      const MeasurementVector b = measure(cloud, geometry, raw_counts ? Normalization::raw_counts : Normalization::per_m);
      const RadonOperator op = RadonOperator::assemble(grid, geometry, cfg.assemble);
      io::write_text(prefix + ".measurements.csv", io::measurements_to_csv(b));
      io::write_json(prefix + ".geometry.json", io::to_json(geometry));
      Json meta = io::operator_metadata(op);
      meta["m"] = b.m;
      meta["normalization"] = raw_counts ? "raw_counts" : "per_m";
      io::write_json(prefix + ".operator.json", meta);
      if (matrix_market) io::write_matrix_market(prefix + ".mtx", op);
      return 0;
    }

    if (*reconstruct) {
      const auto truth = rec_grid.truth_spec();
      const PixelGrid grid = rec_grid.grid(reconstruct, truth);
      PipelineConfig cfg;
      rec_geom.apply(cfg);
      cfg.reg = rec_solver.config();
      const PointCloud cloud = io::read_cloud(cloud_path);
      const PipelineResult result = estimate_density(cloud, grid, cfg);
      write_estimate(prefix, result.estimate);
      Json report = io::to_json(result.report);
      report["transform"] = rec_geom.transform;
      report["penalty"] = rec_solver.penalty;
      report["m"] = cloud.size();
      report["rows"] = result.rows;
      report["storage"] = to_string(result.storage);
      report["grid"] = io::to_json(grid);
      add_truth(report, truth, result.estimate);
      io::write_json(prefix + ".json", report);
      return 0;
    }

    if (*kde_cmd) {
      const auto truth = kde_grid.truth_spec();
      const PixelGrid grid = kde_grid.grid(kde_cmd, truth);
      const PointCloud cloud = io::read_cloud(cloud_path);
      KdeConfig cfg;
      if (kde_cmd->count("--bandwidth")) cfg.bandwidth = bandwidth;
      cfg.rule_constant = rule_constant;
      const DensityEstimate estimate = kde(cloud, grid, cfg);
      write_estimate(prefix, estimate);
      Json report{{"method", "kde"}, {"m", cloud.size()}, {"bandwidth", kde_bandwidth(cloud, grid, cfg)},
                  {"grid", io::to_json(grid)}};
      add_truth(report, truth, estimate);
      io::write_json(prefix + ".json", report);
      return 0;
    }

    if (*fbp_cmd) {
      const auto truth = fbp_grid.truth_spec();
      const PixelGrid grid = fbp_grid.grid(fbp_cmd, truth);
      const PointCloud cloud = io::read_cloud(cloud_path);
      Json report{{"method", "os"}, {"m", cloud.size()}, {"angles", fbp_cfg.angles}, {"s_step", fbp_cfg.s_step},
                  {"grid", io::to_json(grid)}};
      if (fbp_best) {
        require(truth.has_value(), "--best needs --truth");
        const auto values = eval_density(*truth, grid).values;
        const OsSelection best = os_best(cloud, grid, values, {}, fbp_cfg);
        write_estimate(prefix, best.estimate);
        report["h"] = best.h;
        report["candidate_h"] = std::vector<double>{0.5, 1.0, 2.0};
        report["candidate_epsilon"] = best.errors;
        report["epsilon"] = best.error;
      } else {
        const DensityEstimate estimate = os_estimate(cloud, grid, fbp_cfg);
        write_estimate(prefix, estimate);
        report["h"] = fbp_cfg.h;
        add_truth(report, truth, estimate);
      }
      io::write_json(prefix + ".json", report);
      return 0;
    }

    if (*patch_cmd) {
      PipelineConfig geom_cfg;
      patch_geom.apply(geom_cfg);
      patch_cfg.transform = geom_cfg.transform;
      patch_cfg.halfspace = geom_cfg.halfspace;
      patch_cfg.ball = geom_cfg.ball;
      patch_cfg.validate();
      const PointCloud cloud = io::read_cloud(cloud_path);
      const PointCloud queries = io::read_cloud(queries_path, cloud.dim());
      require(queries.dim() == cloud.dim(), "queries and cloud differ in dimension");
      std::optional<DensitySpec> truth;
      if (!patch_truth.empty()) {
        require(cloud.dim() == 3, "--truth is defined for paraboloid samples in R^3");
        truth = io::read_density_spec(patch_truth);
      }
      const auto results = patch_density(cloud, queries, patch_cfg, patch_solver.config());
      Json out = Json::array();
      for (std::size_t q = 0; q < results.size(); ++q) {
        Json entry{{"query_index", q}};
        if (results[q].result) {
          const PatchResult& r = *results[q].result;
          entry.update(io::to_json(r));
          if (truth && r.estimate) {
            const auto values = paraboloid_patch_truth(*truth, kappa, r, queries.point(q), patch_cfg.radius, r.estimate->grid);
            entry["epsilon"] = relative_error(values, r.estimate->values);
          }
        } else {
          entry["error"] = Json{{"code", to_string(*results[q].error)}, {"message", results[q].message}};
        }
        out.push_back(entry);
      }
      io::write_json(prefix + ".json", Json{{"queries", out}});
      io::write_text(prefix + ".csv", io::patch_values_to_csv(results));
      return 0;
    }

    if (*bounds_cmd) {
      Json report{{"kind", kind}};
      double value = 0.0;
      if (kind == "dkw") {
        value = dkw_epsilon(bm, bp);
        report.update(Json{{"m", bm}, {"p", bp}, {"check", alt::dkw_epsilon(bm, bp)}});
      } else if (kind == "hs") {
        value = halfspace_l2_bound(bm, bK, bp, bn);
        report.update(Json{{"m", bm}, {"K", bK}, {"p", bp}, {"n", bn}, {"check", alt::halfspace_l2_bound(bm, bK, bp, bn)},
                           {"note", "first term only; the Riemann-sum term eps(K) is omitted"}});
      } else if (kind == "sph") {
        value = spherical_l2_bound(bm, bK, bp);
        report.update(Json{{"m", bm}, {"K", bK}, {"p", bp}, {"check", alt::spherical_l2_bound(bm, bK, bp)}});
      } else if (kind == "surface") {
        value = sphere_surface_area(bn);
        report["n"] = bn;
      } else if (kind == "reconstruction") {
        const double data = bounds_cmd->count("--data-bound") ? data_bound : halfspace_l2_bound(bm, bK, bp, bn);
        value = reconstruction_l2_bound(c, rho, data, bn);
        report.update(Json{{"c", c}, {"rho", rho}, {"data_bound", data}, {"n", bn},
                           {"note", "c and rho are user-supplied placeholders"}});
      } else {
        const DensitySpec spec = spec_path.empty() ? builtin_density(2) : io::read_density_spec(spec_path);
        const CoverageReport cov = coverage_experiment(spec, static_cast<std::size_t>(bm), static_cast<std::size_t>(bK),
                                                       bp, trials, seed);
        value = cov.violation_fraction;
        report.update(io::to_json(cov));
      }
      report["value"] = value;
      std::printf("%.6g\n", value);
      if (!out_path.empty()) io::write_json(out_path, report);
      return 0;
    }

    if (*table_cmd) {
      PipelineConfig cfg;
      table_geom.apply(cfg);
      cfg.reg = table_solver.config();
      Json out;
      if (table_id == "T1" || table_id == "T2") {
        TableOptions opts;
        opts.m = table_m ? table_m : 1000;
        opts.trials = table_cmd->count("--trials") ? trials : 20;
        opts.seed = seed;
        opts.methods.clear();
        for (const auto& name : methods) opts.methods.push_back(parse_method(name));
        opts.pipeline = cfg;
        if (verbose)
          opts.on_trial = [](std::size_t t, Method method, double err) {
            std::fprintf(stderr, "trial %zu %s epsilon %.4f\n", t, std::string(to_string(method)).c_str(), err);
          };
        out = io::to_json(table_id == "T1" ? table_t1(opts) : table_t2(opts));
      } else if (table_id == "patch") {
        PatchTableOptions opts;
        opts.m = table_m ? table_m : 5000;
        opts.trials = table_cmd->count("--trials") ? trials : 3;
        opts.seed = seed;
        opts.patch.transform = cfg.transform;
        opts.patch.halfspace = cfg.halfspace;
        opts.patch.ball = cfg.ball;
        opts.reg = cfg.reg;
        if (verbose)
          opts.on_trial = [](const PatchCell& cell, std::size_t t) {
            std::fprintf(stderr, "trial %zu kappa %g r %g epsilon %.4f\n", t, cell.kappa, cell.radius,
                         cell.errors.empty() ? std::nan("") : cell.errors.back());
          };
        out = io::to_json(patch_table(opts));
      } else {
        const DensitySpec spec = builtin_density(density_id == 0 ? 2 : density_id);
        const std::size_t n = table_cmd->count("--trials") ? trials : 5;
        out = io::to_json(rate_experiment(spec, m_list, cfg, n, seed, table_grid(spec)));
        out["table"] = "rate";
        out["trials"] = n;
        out["seed"] = seed;
      }
      io::write_json(out_path, out);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << io::error_record(to_string(e.code()), e.what()).dump() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << io::error_record("internal", e.what()).dump() << '\n';
    return kExitFailure;
  }
  return 0;
}
