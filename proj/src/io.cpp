#include "raden/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace raden::io {

namespace {

[[noreturn]] void io_fail(const std::string& message) { fail(ErrorCode::io, message); }

double parse_double(std::string_view field, std::size_t line) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
  if (field.size() >= 2 && field.front() == '"' && field.back() == '"') field = field.substr(1, field.size() - 2);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
  if (ec != std::errc() || ptr != field.data() + field.size())
    fail(ErrorCode::validation, "line " + std::to_string(line) + ": cannot parse number '" + std::string(field) + "'");
  return x;
}

/// Non-empty lines split on commas.
std::vector<std::vector<double>> parse_rows(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    std::vector<double> row;
    for (;;) {
      const std::size_t comma = line.find(',');
      row.push_back(parse_double(line.substr(0, comma), line_no));
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> vec(const Json& j) { return j.get<std::vector<double>>(); }

Json component_json(const MixtureComponent& c) {
  Json out;
  out["weight"] = c.weight;
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, GaussianComponent>) {
          out["type"] = "gaussian";
          out["mean"] = k.mean;
          out["sigma"] = k.sigma;
        } else if constexpr (std::is_same_v<T, UniformComponent>) {
          out["type"] = "uniform";
          out["lo"] = k.lo;
          out["hi"] = k.hi;
        } else if constexpr (std::is_same_v<T, ExponentialComponent>) {
          out["type"] = "exponential";
          out["rate"] = k.rate;
          out["origin"] = k.origin;
        } else {
          out["type"] = "gamma";
          out["shape"] = k.shape;
          out["scale"] = k.scale;
          out["origin"] = k.origin;
        }
      },
      c.kind);
  return out;
}

MixtureComponent component_from_json(const Json& j) {
  MixtureComponent c;
  c.weight = j.value("weight", 1.0);
  const std::string type = j.at("type").get<std::string>();
  if (type == "gaussian")
    c.kind = GaussianComponent{vec(j.at("mean")), j.at("sigma").get<double>()};
  else if (type == "uniform")
    c.kind = UniformComponent{vec(j.at("lo")), vec(j.at("hi"))};
  else if (type == "exponential")
    c.kind = ExponentialComponent{j.at("rate").get<double>(), vec(j.at("origin"))};
  else if (type == "gamma")
    c.kind = GammaComponent{j.at("shape").get<double>(), j.at("scale").get<double>(), vec(j.at("origin"))};
  else
    fail(ErrorCode::validation, "unknown component type '" + type + "'");
  return c;
}

template <class Fn>
auto json_guard(Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::validation, std::string("malformed JSON document: ") + e.what());
  }
}

Json lambda_trial_json(const LambdaTrial& t) {
  return Json{{"lambda", t.lambda},
              {"gcv", t.gcv_valid ? Json(t.gcv) : Json(nullptr)},
              {"risk", t.risk},
              {"residual_sq", t.residual_sq},
              {"trace", t.trace},
              {"penalty_value", t.penalty_value},
              {"outer_iterations", t.outer_iterations},
              {"inner_iterations", t.inner_iterations},
              {"converged", t.converged}};
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

std::string format_double(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) io_fail("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) io_fail("write to '" + path.string() + "' failed");
}

std::string cloud_to_csv(const PointCloud& cloud) {
  std::string out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (k) out += ',';
      out += format_double(p[k]);
    }
    out += '\n';
  }
  return out;
}

PointCloud cloud_from_csv(std::string_view text, int dim_if_empty) {
  const auto rows = parse_rows(text);
  if (rows.empty()) return PointCloud(dim_if_empty);
  const std::size_t dim = rows.front().size();
  std::vector<double> coords;
  coords.reserve(rows.size() * dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim)
      fail(ErrorCode::validation, "point " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                                      " coordinates, expected " + std::to_string(dim));
    coords.insert(coords.end(), rows[i].begin(), rows[i].end());
  }
  return PointCloud(static_cast<int>(dim), std::move(coords));
}

void write_cloud(const fs::path& path, const PointCloud& cloud) { write_text(path, cloud_to_csv(cloud)); }

PointCloud read_cloud(const fs::path& path, int dim_if_empty) { return cloud_from_csv(read_text(path), dim_if_empty); }

Json to_json(const DensitySpec& spec) {
  Json j;
  j["dim"] = spec.dim;
  j["domain_lo"] = spec.domain_lo;
  j["domain_hi"] = spec.domain_hi;
  j["components"] = Json::array();
  for (const auto& c : spec.components) j["components"].push_back(component_json(c));
  return j;
}

DensitySpec density_spec_from_json(const Json& j) {
  return json_guard([&] {
    DensitySpec spec;
    spec.dim = j.at("dim").get<int>();
    spec.domain_lo = vec(j.at("domain_lo"));
    spec.domain_hi = vec(j.at("domain_hi"));
    for (const auto& c : j.at("components")) spec.components.push_back(component_from_json(c));
    spec.validate();
    return spec;
  });
}

DensitySpec read_density_spec(const fs::path& path) { return density_spec_from_json(read_json(path)); }

Json to_json(const PixelGrid& grid) {
  return Json{{"origin", std::vector<double>(grid.origin().begin(), grid.origin().end())},
              {"spacing", std::vector<double>(grid.spacing().begin(), grid.spacing().end())},
              {"shape", std::vector<std::size_t>(grid.shape().begin(), grid.shape().end())}};
}

PixelGrid grid_from_json(const Json& j) {
  return json_guard([&] {
    const auto origin = vec(j.at("origin"));
    const auto spacing = vec(j.at("spacing"));
    const auto shape = j.at("shape").get<std::vector<std::size_t>>();
    return PixelGrid(origin, spacing, shape);
  });
}

Json to_json(const ProjectionGeometry& geometry) {
  return std::visit(
      [](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        Json j;
        if constexpr (std::is_same_v<T, HalfSpaceSet>) {
          j["kind"] = "half_space";
          j["dim"] = g.dim;
          j["directions"] = g.directions;
          j["offsets"] = g.offsets;
          j["origin"] = g.origin;
        } else {
          j["kind"] = "ball";
          j["dim"] = g.dim;
          j["centers"] = g.centers;
          j["radii"] = g.radii;
          j["center_grid"] = g.center_grid ? to_json(*g.center_grid) : Json(nullptr);
        }
        return j;
      },
      geometry);
}

ProjectionGeometry geometry_from_json(const Json& j) {
  return json_guard([&]() -> ProjectionGeometry {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "half_space") {
      HalfSpaceSet g;
      g.dim = j.at("dim").get<int>();
      g.directions = vec(j.at("directions"));
      g.offsets = vec(j.at("offsets"));
      if (j.contains("origin")) g.origin = vec(j.at("origin"));
      g.validate();
      return g;
    }
    if (kind == "ball") {
      BallSet g;
      g.dim = j.at("dim").get<int>();
      g.centers = vec(j.at("centers"));
      g.radii = vec(j.at("radii"));
      if (j.contains("center_grid") && !j.at("center_grid").is_null()) g.center_grid = grid_from_json(j.at("center_grid"));
      g.validate();
      return g;
    }
    fail(ErrorCode::validation, "unknown geometry kind '" + kind + "'");
  });
}

std::string measurements_to_csv(const MeasurementVector& b) {
  std::string out;
  for (std::size_t i = 0; i < b.values.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += format_double(b.values[i]);
    out += '\n';
  }
  return out;
}

MeasurementVector measurements_from_csv(std::string_view text, std::size_t m, Normalization normalization) {
  MeasurementVector b;
  b.m = m;
  b.normalization = normalization;
  const auto rows = parse_rows(text);
  b.values.assign(rows.size(), 0.0);
  std::vector<bool> seen(rows.size(), false);
  for (const auto& row : rows) {
    if (row.size() != 2) fail(ErrorCode::validation, "measurement lines are row_index,value");
    const double idx = row[0];
    if (idx < 0 || idx != std::floor(idx) || idx >= static_cast<double>(rows.size()) || seen[static_cast<std::size_t>(idx)])
      fail(ErrorCode::validation, "measurement row indices must be a permutation of 0..rows-1");
    seen[static_cast<std::size_t>(idx)] = true;
    b.values[static_cast<std::size_t>(idx)] = row[1];
  }
  return b;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string geometry_hash(const ProjectionGeometry& geometry) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json(geometry).dump())));
  return buf;
}

Json operator_metadata(const RadonOperator& op) {
  return Json{{"kind", to_string(op.kind())},
              {"rows", op.rows()},
              {"cols", op.cols()},
              {"weight_mode", to_string(op.weight_mode())},
              {"weight", op.weight()},
              {"storage", to_string(op.storage())},
              {"nonzeros", op.nonzeros()},
              {"grid", to_json(op.grid())},
              {"geometry_hash", geometry_hash(op.geometry())}};
}

void write_matrix_market(const fs::path& path, const RadonOperator& op) {
  const SparsePattern* csr = op.pattern();
  if (!csr) fail(ErrorCode::unsupported, "Matrix Market export needs explicit-sparse storage");
  std::string out = "%%MatrixMarket matrix coordinate real general\n";
  out += std::to_string(op.rows()) + ' ' + std::to_string(op.cols()) + ' ' + std::to_string(csr->col.size()) + '\n';
  const std::string w = format_double(op.weight());
  for (std::size_t r = 0; r < op.rows(); ++r)
    for (std::uint64_t k = csr->row_ptr[r]; k < csr->row_ptr[r + 1]; ++k) {
      out += std::to_string(r + 1);
      out += ' ';
      out += std::to_string(csr->col[k] + 1);
      out += ' ';
      out += w;
      out += '\n';
    }
  write_text(path, out);
}

CooMatrix read_matrix_market(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("%%MatrixMarket matrix coordinate real general", 0) != 0)
    fail(ErrorCode::validation, "'" + path.string() + "' is not a coordinate real general Matrix Market file");
  while (std::getline(in, line) && !line.empty() && line[0] == '%') {
  }
  CooMatrix coo;
  std::size_t nnz = 0;
  if (!(std::istringstream(line) >> coo.rows >> coo.cols >> nnz)) fail(ErrorCode::validation, "bad Matrix Market size line");
  coo.row.reserve(nnz);
  coo.col.reserve(nnz);
  coo.value.reserve(nnz);
  for (std::size_t k = 0; k < nnz; ++k) {
    std::size_t r = 0, c = 0;
    double v = 0.0;
    if (!(in >> r >> c >> v) || r == 0 || c == 0 || r > coo.rows || c > coo.cols)
      fail(ErrorCode::validation, "bad Matrix Market entry " + std::to_string(k));
    coo.row.push_back(r - 1);
    coo.col.push_back(c - 1);
    coo.value.push_back(v);
  }
  return coo;
}

Json to_json(const SolveReport& report) {
  Json sweep = Json::array();
  for (const auto& t : report.sweep) sweep.push_back(lambda_trial_json(t));
  return Json{{"selection", report.selection},
              {"chosen_lambda", report.chosen_lambda},
              {"beta", report.beta},
              {"sweep", sweep},
              {"iterations", report.iterations},
              {"final_residual", report.final_residual},
              {"objective_trace", report.objective_trace},
              {"converged", report.converged},
              {"objective_monotone", report.objective_monotone}};
}

std::string estimate_to_csv(const DensityEstimate& estimate) {
  const auto shape = estimate.grid.shape();
  const std::size_t nx = shape[0];
  std::string out;
  for (std::size_t start = 0; start < estimate.values.size(); start += nx) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      if (ix) out += ',';
      out += format_double(estimate.values[start + ix]);
    }
    out += '\n';
  }
  return out;
}

std::string estimate_to_pgm(const DensityEstimate& estimate) {
  require(estimate.grid.dim() == 2, "PGM output needs a 2-D grid");
  const std::size_t nx = estimate.grid.shape()[0], ny = estimate.grid.shape()[1];
  const auto [lo_it, hi_it] = std::minmax_element(estimate.values.begin(), estimate.values.end());
  const double lo = estimate.values.empty() ? 0.0 : *lo_it;
  const double range = estimate.values.empty() ? 0.0 : *hi_it - lo;
  std::string out = "P5\n" + std::to_string(nx) + ' ' + std::to_string(ny) + "\n255\n";
  for (std::size_t row = 0; row < ny; ++row) {
    const std::size_t iy = ny - 1 - row;
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const double t = range > 0.0 ? (estimate.values[iy * nx + ix] - lo) / range : 0.0;
      out += static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0)));
    }
  }
  return out;
}

Json to_json(const PatchResult& patch) {
  Json j{{"neighborhood_size", patch.neighborhood_size},
         {"eigenvalues", patch.eigenvalues},
         {"selected_dim", patch.selected_dim},
         {"reconstruction_dim", kPatchDim},
         {"dim_clamped", patch.dim_clamped},
         {"mean", patch.mean},
         {"query_coords", patch.query_coords},
         {"value", patch.value}};
  if (patch.estimate) j["grid"] = to_json(patch.estimate->grid);
  if (patch.report) j["report"] = to_json(*patch.report);
  return j;
}

std::string patch_values_to_csv(const std::vector<PatchQuery>& queries) {
  std::string out;
  for (std::size_t q = 0; q < queries.size(); ++q)
    if (queries[q].result) out += std::to_string(q) + ',' + format_double(queries[q].result->value) + '\n';
  return out;
}

Json to_json(const TableReport& report) {
  Json methods = Json::array();
  for (const auto& s : report.methods)
    methods.push_back(Json{{"method", to_string(s.method)},
                           {"mean", s.mean},
                           {"stddev", s.stddev},
                           {"successes", s.errors.size()},
                           {"failures", s.failures},
                           {"errors", s.errors},
                           {"failure_messages", s.failure_messages}});
  return Json{{"table", report.table},
              {"m", report.m},
              {"trials", report.trials},
              {"seed", report.seed},
              {"methods", methods}};
}

Json to_json(const PatchTable& table) {
  Json cells = Json::array();
  for (const auto& c : table.cells)
    cells.push_back(Json{{"kappa", c.kappa},
                         {"radius", c.radius},
                         {"median", c.median},
                         {"mean", c.mean},
                         {"failures", c.failures},
                         {"errors", c.errors},
                         {"neighborhood_sizes", c.neighborhood_sizes},
                         {"selected_dims", c.selected_dims}});
  return Json{{"table", "patch"},
              {"m", table.m},
              {"trials", table.trials},
              {"seed", table.seed},
              {"transform", to_string(table.transform)},
              {"cells", cells}};
}

Json to_json(const RateReport& report) {
  Json points = Json::array();
  for (const auto& p : report.points)
    points.push_back(Json{{"m", p.m},
                          {"errors", p.errors},
                          {"mean_log_error", p.mean_log_error},
                          {"std_log_error", p.std_log_error},
                          {"failures", p.failures}});
  return Json{{"points", points},
              {"slope", report.slope},
              {"intercept", report.intercept},
              {"fit_residual", report.fit_residual}};
}

Json to_json(const CoverageReport& report) {
  return Json{{"m", report.m},
              {"trials", report.trials},
              {"directions", report.directions},
              {"p", report.p},
              {"threshold", report.threshold},
              {"violations", report.violations},
              {"violation_fraction", report.violation_fraction},
              {"mean_sup_error", finite_or_null(report.mean_sup_error)},
              {"sup_errors", report.sup_errors}};
}

Json error_record(std::string_view code, std::string_view message) {
  return Json{{"error", Json{{"code", code}, {"message", message}}}};
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + '\n'); }

Json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::validation, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace raden::io
