#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>

#include "doctest.h"
#include "raden/error.hpp"
#include "raden/experiments.hpp"
#include "raden/io.hpp"
#include "support.hpp"

using namespace raden;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "raden_io_test";
  fs::create_directories(dir);
  return dir;
}

PixelGrid small_grid() {
  const double lo[2] = {0.0, 0.0}, hi[2] = {8.0, 6.0};
  const std::size_t shape[2] = {8, 6};
  return PixelGrid::covering(lo, hi, shape);
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("doubles round trip through their shortest form") {
    for (double x : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, std::numeric_limits<double>::max()}) {
      const std::string s = io::format_double(x);
      CHECK(std::strtod(s.c_str(), nullptr) == x);
    }
  }

  TEST_CASE("point clouds round trip") {
    const PointCloud cloud = test::uniform_cloud(37, -3.0, 9.0, CounterRng(1));
    const PointCloud back = io::cloud_from_csv(io::cloud_to_csv(cloud));
    CHECK(back == cloud);
    const fs::path path = scratch_dir() / "cloud.csv";
    io::write_cloud(path, cloud);
    CHECK(io::read_cloud(path) == cloud);
    CHECK(io::cloud_from_csv("").size() == 0);
    CHECK(io::cloud_to_csv(PointCloud(2)).empty());
    CHECK_THROWS_AS(io::cloud_from_csv("1,2\n3\n"), Error);
    CHECK_THROWS_AS(io::cloud_from_csv("1,x\n"), Error);
    try {
      io::read_cloud(scratch_dir() / "missing.csv");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::io);
    }
  }

  TEST_CASE("density specs round trip") {
    for (int which = 1; which <= 4; ++which) {
      const DensitySpec spec = builtin_density(which);
      const io::Json j = io::to_json(spec);
      const DensitySpec back = io::density_spec_from_json(j);
      CHECK(io::to_json(back) == j);
      CHECK(sample_density(back, 50, 3).coords() == sample_density(spec, 50, 3).coords());
    }
    io::Json bad = io::to_json(builtin_density(2));
    bad["components"][0]["type"] = "cauchy";
    CHECK_THROWS_AS(io::density_spec_from_json(bad), Error);
  }

  TEST_CASE("geometries and grids round trip") {
    const PixelGrid g = small_grid();
    CHECK(io::grid_from_json(io::to_json(g)) == g);
    HalfSpaceGeometryConfig hc;
    hc.directions = 7;
    hc.offsets = 9;
    const ProjectionGeometry hs = make_halfspace_geometry(g, hc);
    const ProjectionGeometry balls = make_ball_geometry(g);
    for (const ProjectionGeometry& geo : {hs, balls}) {
      const io::Json j = io::to_json(geo);
      CHECK(io::to_json(io::geometry_from_json(j)) == j);
      CHECK(io::geometry_hash(io::geometry_from_json(j)) == io::geometry_hash(geo));
      CHECK(io::geometry_hash(geo).size() == 16);
    }
    CHECK(io::geometry_hash(hs) != io::geometry_hash(balls));
  }

  TEST_CASE("fnv1a reference values") {
    CHECK(io::fnv1a("") == 0xcbf29ce484222325ull);
    CHECK(io::fnv1a("a") == 0xaf63dc4c8601ec8cull);
    CHECK(io::fnv1a("foobar") == 0x85944171f73967e8ull);
  }

  TEST_CASE("measurements round trip") {
    const PixelGrid g = small_grid();
    const ProjectionGeometry geo = make_ball_geometry(g);
    const PointCloud cloud = test::uniform_cloud(120, 0.0, 6.0, CounterRng(4));
    for (Normalization n : {Normalization::per_m, Normalization::raw_counts}) {
      const MeasurementVector b = measure(cloud, geo, n);
      const MeasurementVector back = io::measurements_from_csv(io::measurements_to_csv(b), b.m, n);
      CHECK(back.values == b.values);
      CHECK(back.m == b.m);
    }
  }

  TEST_CASE("matrix market export matches the operator") {
    const PixelGrid g = small_grid();
    HalfSpaceGeometryConfig hc;
    hc.directions = 5;
    hc.offsets = 7;
    AssembleOptions opt;
    opt.storage = Storage::explicit_sparse;
    const RadonOperator op = RadonOperator::assemble(g, make_halfspace_geometry(g, hc), opt);
    const fs::path path = scratch_dir() / "op.mtx";
    io::write_matrix_market(path, op);
    const io::CooMatrix coo = io::read_matrix_market(path);
    CHECK(coo.rows == op.rows());
    CHECK(coo.cols == op.cols());
    CHECK(coo.value.size() == op.nonzeros());
    std::vector<double> dense(op.rows() * op.cols(), 0.0);
    for (std::size_t k = 0; k < coo.value.size(); ++k) dense[coo.row[k] * op.cols() + coo.col[k]] = coo.value[k];
    for (std::size_t r = 0; r < op.rows(); ++r) {
      const auto row = op.row_pattern(r);
      for (std::size_t c = 0; c < op.cols(); ++c) CHECK(dense[r * op.cols() + c] == row[c] * op.weight());
    }
    const io::Json meta = io::operator_metadata(op);
    CHECK(meta["rows"] == op.rows());
    CHECK(meta["storage"] == "explicit-sparse");

    AssembleOptions mf;
    mf.storage = Storage::matrix_free;
    const RadonOperator free_op = RadonOperator::assemble(g, make_halfspace_geometry(g, hc), mf);
    CHECK_THROWS_AS(io::write_matrix_market(scratch_dir() / "mf.mtx", free_op), Error);
  }

  TEST_CASE("estimate dumps") {
    const PixelGrid g = small_grid();
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    const DensityEstimate est{g, v};
    const std::string csv = io::estimate_to_csv(est);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
    CHECK(csv.substr(0, csv.find('\n')) == "0,1,2,3,4,5,6,7");
    const std::string pgm = io::estimate_to_pgm(est);
    const std::string header = "P5\n8 6\n255\n";
    REQUIRE(pgm.size() == header.size() + g.size());
    CHECK(pgm.substr(0, header.size()) == header);
    // Top image row is the highest y: values 40..47, the last is the maximum.
    CHECK(static_cast<unsigned char>(pgm[header.size() + 7]) == 255);
    CHECK(static_cast<unsigned char>(pgm[header.size() + 5 * 8]) == 0);
  }

  TEST_CASE("error records and json files") {
    const io::Json e = io::error_record("io", "no such file");
    CHECK(e["error"]["code"] == "io");
    CHECK(e["error"]["message"] == "no such file");
    const fs::path path = scratch_dir() / "nested" / "e.json";
    io::write_json(path, e);
    CHECK(io::read_json(path) == e);
  }
}
