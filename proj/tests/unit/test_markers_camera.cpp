#include "support.hpp"

#include "tacsim/camera.hpp"
#include "tacsim/errors.hpp"
#include "tacsim/markers.hpp"
#include "tacsim/scenario.hpp"

#include <doctest.h>

#include <numbers>
#include <random>
#include <set>

using namespace tacsim;

namespace {

ParticleCloud slab(double y_extent = 0.02) {
  return make_box_cloud(Vec3(0.02, y_extent, 0.005), 0.0005, Vec3(0, 0, 0.0025));
}

CameraModel fixture_camera() {
  return CameraModel(Mat3::Identity(), Vec3(0, 0, 0.05), 200.0, 200.0, 114.0, 114.0, 228, 228);
}

}  // namespace

TEST_CASE("9x9 and 9x7 layouts resolve to disjoint groups") {
  MarkerLayout layout;
  const auto cloud = slab();
  const auto groups = assign_markers(cloud, layout);
  CHECK(groups.size() == 81);

  std::set<std::size_t> seen;
  std::size_t members = 0;
  const auto nominal = marker_nominal_positions(cloud, layout);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    CHECK(groups[g].particle_indices.size() >= 5);
    members += groups[g].particle_indices.size();
    seen.insert(groups[g].particle_indices.begin(), groups[g].particle_indices.end());
    std::vector<Vec3> pts;
    for (auto i : groups[g].particle_indices) pts.push_back(cloud.positions[i]);
    CHECK((centroid(pts) - nominal[g]).norm() <= 0.5 * cloud.spacing);
  }
  CHECK(seen.size() == members);
  CHECK(members <= cloud.size());
  CHECK(groups.front().id == MarkerId{0, 0});
  CHECK(groups.back().id == MarkerId{8, 8});

  layout.rows = 7;
  CHECK(assign_markers(slab(0.016), layout).size() == 63);
}

TEST_CASE("marker layout errors") {
  MarkerLayout layout;
  layout.dot_radius = 0.0004;
  CHECK_THROWS_AS(assign_markers(slab(), layout), LayoutResolutionError);
  layout = MarkerLayout{};
  layout.pitch = 0.0015;
  CHECK_THROWS_AS(layout.validate(), ArgumentError);
}

TEST_CASE("centroids follow translations and group sizes persist") {
  const auto cloud = slab();
  const auto groups = assign_markers(cloud, MarkerLayout{});
  std::vector<Particle> ps(cloud.size());
  for (std::size_t i = 0; i < ps.size(); ++i) ps[i].x = cloud.positions[i];
  const auto before = extract_groups(ps, groups);
  const Vec3 d(0.001, -0.002, 0.0005);
  for (auto& p : ps) p.x += d;
  const auto after = extract_groups(ps, groups);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    CHECK(after[g].size() == before[g].size());
    CHECK((centroid(after[g]) - centroid(before[g]) - d).norm() < 1e-15);
  }
}

TEST_CASE("calibration validation") {
  fixture_camera();
  Mat3 reflect = Mat3::Identity();
  reflect(2, 2) = -1.0;
  CHECK_THROWS_AS(CameraModel(reflect, Vec3::Zero(), 200, 200, 114, 114, 228, 228), SchemaError);
  try {
    CameraModel(Mat3::Identity(), Vec3::Zero(), 0.0, 200, 114, 114, 228, 228);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.field() == "fx");
  }
  const std::string distorted =
      R"({"rotation":[1,0,0,0,1,0,0,0,1],"translation":[0,0,0.05],"fx":200,"fy":200,"cx":114,"cy":114,)"
      R"("width":228,"height":228,"distortion":[0.1,0,0,0,0]})";
  CHECK_THROWS_AS(parse_calibration(distorted), SchemaError);
  CHECK_THROWS_AS(parse_calibration("{ not json"), ParseError);
  CHECK_THROWS_AS(load_calibration("/nonexistent/calib.json"), MissingFileError);

  const CameraModel back = parse_calibration(calibration_to_json(fixture_camera()));
  CHECK(back.fx() == 200.0);
  CHECK(back.translation() == Vec3(0, 0, 0.05));
  CHECK(back.width() == 228);
}

TEST_CASE("world to camera") {
  const CameraModel id(Mat3::Identity(), Vec3::Zero(), 200, 200, 114, 114, 228, 228);
  CHECK(world_to_camera(id, Vec3(1, 2, 3)) == Vec3(1, 2, 3));
  CHECK(world_to_camera(fixture_camera(), Vec3::Zero()) == Vec3(0, 0, 0.05));
  const CameraModel rz(rotation_about_z(std::numbers::pi / 2), Vec3::Zero(), 200, 200, 114, 114, 228, 228);
  CHECK((world_to_camera(rz, Vec3(1, 0, 0)) - Vec3(0, 1, 0)).norm() < 1e-15);
}

TEST_CASE("pinhole projection") {
  const CameraModel cam = fixture_camera();
  CHECK(camera_to_pixel(cam, Vec3(0, 0, 0.3)) == Vec2(114, 114));
  const Vec2 px = camera_to_pixel(cam, Vec3(0.01, -0.02, 0.05));
  CHECK(std::abs(px.x() - 154.0) < 1e-9);
  CHECK(std::abs(px.y() - 34.0) < 1e-9);
  CHECK_THROWS_AS(camera_to_pixel(cam, Vec3(0.01, 0, -0.05)), BehindCameraError);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.05, 0.05), z(0.01, 0.2), s(0.1, 10.0);
  for (int t = 0; t < 200; ++t) {
    const Vec3 x(u(rng), u(rng), z(rng));
    CHECK((camera_to_pixel(cam, x) - camera_to_pixel(cam, s(rng) * x)).norm() < 1e-9);
  }
}

TEST_CASE("project_points composes the two stages and flags invisibility") {
  const CameraModel cam = fixture_camera();
  CHECK(project_points(cam, {}).empty());
  const std::vector<Vec3> pts{Vec3(0.001, 0.002, 0.0), Vec3(0, 0, -0.1), Vec3(0.5, 0, 0)};
  const auto proj = project_points(cam, pts);
  REQUIRE(proj.size() == 3);
  CHECK(proj[0].visible);
  CHECK(proj[0].pixel == camera_to_pixel(cam, world_to_camera(cam, pts[0])));
  CHECK_FALSE(proj[1].visible);
  CHECK(std::isnan(proj[1].pixel.x()));
  CHECK_FALSE(proj[2].visible);
}

TEST_CASE("rest marker grid projects to a uniform pixel grid") {
  const Scenario sc = load_scenario(test::fixture_dir() / "press_dotin.json");
  const SimulationSetup setup = build_simulation(sc);
  const CameraModel& cam = *sc.camera;
  const auto proj = project_points(cam, setup.marker_rest);
  REQUIRE(proj.size() == 81);
  const double z = world_to_camera(cam, setup.marker_rest[0]).z();
  const double pitch_px = cam.fx() * sc.markers.pitch / z;
  const Vec2 origin = proj[40].pixel - pitch_px * Vec2(4, 4);
  double worst = 0.0;
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c < 9; ++c) {
      const auto& p = proj[r * 9 + c];
      CHECK(p.visible);
      worst = std::max(worst, (p.pixel - (origin + pitch_px * Vec2(c, r))).norm());
    }
  CHECK(worst < 0.5);

  // Fronto-parallel plane: pixel distance / world distance = fx / Z.
  const double world = (setup.marker_rest[80] - setup.marker_rest[0]).norm();
  const double pixels = (proj[80].pixel - proj[0].pixel).norm();
  CHECK(std::abs(pixels / world - cam.fx() / z) < 1e-9 * cam.fx() / z);
}
