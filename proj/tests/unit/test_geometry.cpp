#include "support.hpp"

#include "tacsim/errors.hpp"
#include "tacsim/geometry.hpp"
#include "tacsim/stl.hpp"

#include <doctest.h>

#include <Eigen/Geometry>

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

using namespace tacsim;

namespace {

TriangleMesh unit_cube() {
  TriangleMesh m;
  for (int i = 0; i < 8; ++i) m.vertices.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
  // Outward-facing quads split into triangles.
  const std::array<std::array<std::uint32_t, 4>, 6> quads{{
      {0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}}};
  for (const auto& q : quads) {
    m.faces.push_back({q[0], q[1], q[2]});
    m.faces.push_back({q[0], q[2], q[3]});
  }
  return m;
}

// Unwelded binary STL: every facet stores its own three corners.
std::vector<std::byte> cube_stl_bytes() { return serialize_stl_binary(unit_cube(), "cube"); }

TriangleMesh uv_sphere(double r, int slices, int stacks) {
  TriangleMesh m;
  m.vertices.emplace_back(0.0, 0.0, r);
  for (int i = 1; i < stacks; ++i) {
    const double phi = std::numbers::pi * i / stacks;
    for (int j = 0; j < slices; ++j) {
      const double th = 2.0 * std::numbers::pi * j / slices;
      m.vertices.emplace_back(r * std::sin(phi) * std::cos(th), r * std::sin(phi) * std::sin(th), r * std::cos(phi));
    }
  }
  m.vertices.emplace_back(0.0, 0.0, -r);
  const auto ring = [&](int i, int j) { return static_cast<std::uint32_t>(1 + (i - 1) * slices + (j % slices)); };
  const auto south = static_cast<std::uint32_t>(m.vertices.size() - 1);
  for (int j = 0; j < slices; ++j) m.faces.push_back({0, ring(1, j), ring(1, j + 1)});
  for (int i = 1; i < stacks - 1; ++i)
    for (int j = 0; j < slices; ++j) {
      m.faces.push_back({ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)});
      m.faces.push_back({ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)});
    }
  for (int j = 0; j < slices; ++j) m.faces.push_back({south, ring(stacks - 1, j + 1), ring(stacks - 1, j)});
  return m;
}

}  // namespace

TEST_CASE("rigid transforms reject non-rotations and compose") {
  CHECK_THROWS_AS(RigidTransform(Mat3::Identity() * 2.0, Vec3::Zero()), ArgumentError);
  Mat3 reflect = Mat3::Identity();
  reflect(0, 0) = -1.0;
  CHECK_THROWS_AS(RigidTransform(reflect, Vec3::Zero()), ArgumentError);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RigidTransform acc;
  for (int i = 0; i < 200; ++i) {
    const Eigen::Quaterniond q(u(rng), u(rng), u(rng), u(rng));
    const RigidTransform step(q.normalized().toRotationMatrix(), Vec3(u(rng), u(rng), u(rng)));
    const Vec3 x(u(rng), u(rng), u(rng));
    CHECK((acc * step).apply(x).isApprox(acc.apply(step.apply(x)), 1e-12));
    acc = acc * step;
    CHECK(is_rotation(acc.rotation(), 1e-9));
  }
  const Vec3 x(0.3, -0.2, 0.9);
  CHECK((acc.inverse().apply(acc.apply(x)) - x).norm() < 1e-12);
  CHECK((rotation_about_z(std::numbers::pi / 2) * Vec3::UnitX() - Vec3::UnitY()).norm() < 1e-15);
}

TEST_CASE("binary cube welds to 8 vertices and 12 faces") {
  const TriangleMesh m = parse_stl(cube_stl_bytes());
  CHECK(m.vertices.size() == 8);
  CHECK(m.faces.size() == 12);
  CHECK(m.signed_volume() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ASCII single facet") {
  const std::string text =
      "solid tri\n facet normal 0 0 1\n  outer loop\n   vertex 0 0 0\n   vertex 1 0 0\n   vertex 0 1 0\n"
      "  endloop\n endfacet\nendsolid tri\n";
  const TriangleMesh m = parse_stl(std::as_bytes(std::span(text.data(), text.size())));
  CHECK(m.vertices.size() == 3);
  CHECK(m.faces.size() == 1);
}

TEST_CASE("truncated binary STL reports the first incomplete facet") {
  auto bytes = cube_stl_bytes();
  bytes.resize(84 + 3 * 50);  // header + count + 3 of 12 facets
  try {
    parse_stl(bytes);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("facet 4 of 12") != std::string::npos);
    CHECK(e.byte_offset() == 84 + 3 * 50);
  }
}

TEST_CASE("malformed ASCII STL is a parse error with offset") {
  const std::string text = "solid x\n facet normal 0 0 1\n outer loop\n vertex 0 0 zero\n";
  CHECK_THROWS_AS(parse_stl(std::as_bytes(std::span(text.data(), text.size()))), ParseError);
}

TEST_CASE("STL binary round trip keeps vertices to 1e-6") {
  for (const auto& name : indenter_names()) {
    const TriangleMesh m = make_indenter(name);
    const TriangleMesh back = parse_stl(serialize_stl_binary(m));
    REQUIRE(back.faces.size() == m.faces.size());
    for (std::size_t f = 0; f < m.faces.size(); ++f)
      for (int c = 0; c < 3; ++c)
        CHECK((back.vertices[back.faces[f][c]] - m.vertices[m.faces[f][c]]).norm() < 1e-6);
  }
}

TEST_CASE("missing STL file") { CHECK_THROWS_AS(read_stl_file("/nonexistent/indenter.stl"), MissingFileError); }

TEST_CASE("box clouds") {
  const auto c8 = make_box_cloud(Vec3(1, 1, 1), 0.5);
  CHECK(c8.size() == 8);
  for (const auto& p : c8.positions) CHECK((p.cwiseAbs() - Vec3::Constant(0.25)).norm() < 1e-15);
  CHECK(make_box_cloud(Vec3(0.02, 0.02, 0.005), 0.0005).size() == 16000);
  const auto one = make_box_cloud(Vec3(1, 1, 1), 2.0, Vec3(3, 4, 5));
  REQUIRE(one.size() == 1);
  CHECK(one.positions[0] == Vec3(3, 4, 5));
  CHECK(min_pairwise_distance(make_box_cloud(Vec3(0.02, 0.02, 0.005), 0.0005)) == doctest::Approx(0.0005));
  CHECK_THROWS_AS(make_box_cloud(Vec3(1, 1, 1), 0.0), ArgumentError);
}

TEST_CASE("voxel sampling of a cube") {
  const TriangleMesh cube = unit_cube();
  const auto c8 = voxel_sample_volume(cube, 0.5);
  REQUIRE(c8.size() == 8);
  for (const auto& p : c8.positions) CHECK(((p - Vec3::Constant(0.5)).cwiseAbs() - Vec3::Constant(0.25)).norm() < 1e-12);
  CHECK(voxel_sample_volume(cube, 0.25).size() == 64);
}

TEST_CASE("voxel sampling of a sphere matches its volume") {
  const TriangleMesh sphere = uv_sphere(1.0, 96, 48);
  VolumeSampleReport report;
  const auto cloud = voxel_sample_volume(sphere, 0.1, &report);
  const double expected = 4.0 / 3.0 * std::numbers::pi / 0.001;
  CHECK(std::abs(static_cast<double>(cloud.size()) - expected) < 0.05 * expected);
  CHECK_FALSE(report.suspect_non_watertight);

  // Halving the spacing multiplies the count by about 8.
  const auto fine = voxel_sample_volume(sphere, 0.05);
  const double ratio = static_cast<double>(fine.size()) / static_cast<double>(cloud.size());
  CHECK(std::abs(ratio - 8.0) < 0.8);
}

TEST_CASE("open meshes are flagged as suspect") {
  TriangleMesh open = unit_cube();
  open.faces.resize(10);
  VolumeSampleReport report;
  voxel_sample_volume(open, 0.1, &report);
  CHECK(report.suspect_non_watertight);
}

TEST_CASE("bundled indenters are closed and outward oriented") {
  for (const auto& name : indenter_names()) {
    const TriangleMesh m = make_indenter(name);
    m.validate();
    VolumeSampleReport report;
    const auto cloud = voxel_sample_volume(m, 0.25, &report);
    CAPTURE(name);
    CHECK(m.signed_volume() > 0.0);
    CHECK_FALSE(report.suspect_non_watertight);
    CHECK(std::abs(cloud.size() * 0.25 * 0.25 * 0.25 - m.signed_volume()) < 0.1 * m.signed_volume());
  }
}
