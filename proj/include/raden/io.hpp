#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "raden/baselines.hpp"
#include "raden/bounds.hpp"
#include "raden/error.hpp"
#include "raden/experiments.hpp"
#include "raden/manifold.hpp"
#include "raden/pointcloud.hpp"
#include "raden/projection.hpp"
#include "raden/radon_operator.hpp"
#include "raden/solver.hpp"

namespace raden::io {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

/// Shortest round-trip decimal form.
std::string format_double(double x);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, std::string_view text);

// Point clouds: one point per line, no header. An empty file is an empty
// cloud of dimension `dim_if_empty`.
std::string cloud_to_csv(const PointCloud& cloud);
PointCloud cloud_from_csv(std::string_view text, int dim_if_empty = 2);
void write_cloud(const fs::path& path, const PointCloud& cloud);
PointCloud read_cloud(const fs::path& path, int dim_if_empty = 2);

Json to_json(const DensitySpec& spec);
DensitySpec density_spec_from_json(const Json& j);
DensitySpec read_density_spec(const fs::path& path);

Json to_json(const PixelGrid& grid);
PixelGrid grid_from_json(const Json& j);

Json to_json(const ProjectionGeometry& geometry);
ProjectionGeometry geometry_from_json(const Json& j);

/// `row_index,value` lines.
std::string measurements_to_csv(const MeasurementVector& b);
MeasurementVector measurements_from_csv(std::string_view text, std::size_t m, Normalization normalization);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
/// Hash of the compact JSON form of a geometry, as 16 hex digits.
std::string geometry_hash(const ProjectionGeometry& geometry);

Json operator_metadata(const RadonOperator& op);
/// Coordinate `real general` file, 1-based. Explicit storage only.
void write_matrix_market(const fs::path& path, const RadonOperator& op);

struct CooMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row;  // 0-based
  std::vector<std::size_t> col;
  std::vector<double> value;
};
CooMatrix read_matrix_market(const fs::path& path);

Json to_json(const SolveReport& report);

/// One line per grid row (axis 1), lowest y first, nx comma-separated values.
std::string estimate_to_csv(const DensityEstimate& estimate);
/// Binary P5, linear min-max to 0..255, highest y in the first image row.
std::string estimate_to_pgm(const DensityEstimate& estimate);

Json to_json(const PatchResult& patch);
/// `query_index,value` lines for the successful queries.
std::string patch_values_to_csv(const std::vector<PatchQuery>& queries);

Json to_json(const TableReport& report);
Json to_json(const PatchTable& table);
Json to_json(const RateReport& report);
Json to_json(const CoverageReport& report);

/// {"error": {"code": ..., "message": ...}}
Json error_record(std::string_view code, std::string_view message);

void write_json(const fs::path& path, const Json& j);
Json read_json(const fs::path& path);

}  // namespace raden::io
