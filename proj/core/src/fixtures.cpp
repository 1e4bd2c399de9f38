#include "tacsim/fixtures.hpp"

#include "tacsim/errors.hpp"
#include "tacsim/io.hpp"
#include "tacsim/stl.hpp"

#include <Eigen/Geometry>
#include <json.hpp>

#include <cmath>
#include <numbers>

namespace tacsim {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

TriangleMesh extrude_profile(std::span<const Vec2> ring, const Vec2& fan_center, double height) {
  if (ring.size() < 3) throw ArgumentError("profile needs at least 3 vertices");
  if (!(height > 0.0)) throw ArgumentError("extrusion height must be positive");
  TriangleMesh mesh;
  const auto n = static_cast<std::uint32_t>(ring.size());
  for (const auto& p : ring) mesh.vertices.emplace_back(p.x(), p.y(), 0.0);
  for (const auto& p : ring) mesh.vertices.emplace_back(p.x(), p.y(), height);
  const std::uint32_t cb = 2 * n, ct = 2 * n + 1;
  mesh.vertices.emplace_back(fan_center.x(), fan_center.y(), 0.0);
  mesh.vertices.emplace_back(fan_center.x(), fan_center.y(), height);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t j = (i + 1) % n;
    mesh.faces.push_back({cb, j, i});
    mesh.faces.push_back({ct, n + i, n + j});
    mesh.faces.push_back({i, j, n + j});
    mesh.faces.push_back({i, n + j, n + i});
  }
  return mesh;
}

namespace {

std::vector<Vec2> circle(double r, int segments, double from = 0.0, double to = 2.0 * std::numbers::pi,
                         bool closed = true) {
  std::vector<Vec2> out;
  const int count = closed ? segments : segments + 1;
  for (int i = 0; i < count; ++i) {
    const double t = from + (to - from) * i / segments;
    out.emplace_back(r * std::cos(t), r * std::sin(t));
  }
  return out;
}

}  // namespace

std::vector<std::string> indenter_names() { return {"dot_in", "pacman", "hexagon", "cylinder"}; }

TriangleMesh make_indenter(std::string_view name) {
  constexpr double pi = std::numbers::pi;
  if (name == "dot_in") {
    const auto ring = circle(2.5, 48);
    return extrude_profile(ring, Vec2::Zero(), 4.0);
  }
  if (name == "pacman") {
    // 60 degree mouth opening towards +x.
    std::vector<Vec2> ring{Vec2::Zero()};
    const auto arc = circle(3.5, 40, pi / 6.0, 2.0 * pi - pi / 6.0, false);
    ring.insert(ring.end(), arc.begin(), arc.end());
    return extrude_profile(ring, Vec2(-1.0, 0.0), 4.0);
  }
  if (name == "hexagon") {
    const auto ring = circle(3.5, 6);
    return extrude_profile(ring, Vec2::Zero(), 4.0);
  }
  if (name == "cylinder") {
    // Lying on its side: axis along y, length 10.
    const auto ring = circle(2.0, 48);
    const TriangleMesh upright = extrude_profile(ring, Vec2::Zero(), 10.0);
    const Mat3 R = Eigen::AngleAxisd(-pi / 2.0, Vec3::UnitX()).toRotationMatrix();
    return transformed(upright, RigidTransform(R, Vec3(0.0, -5.0, 2.0)));
  }
  throw ArgumentError("unknown indenter '" + std::string(name) + "'");
}

CameraModel sensor_9x9_calibration() {
  return CameraModel(Mat3::Identity(), Vec3(0.0, 0.0, 0.02), 270.0, 270.0, 114.0, 114.0, 228, 228);
}

CameraModel gelsight_mini_calibration() {
  return CameraModel(Mat3::Identity(), Vec3(0.0, 0.0, 0.02), 270.0, 270.0, 114.0, 90.0, 228, 180);
}

namespace {

struct Motion {
  const char* kind;
  double depth;
  double slip_x = 0.0;
  double angle_deg = 0.0;
  double angular_speed = 0.0;
};

std::string scenario_json(const std::string& name, const std::string& mesh, const std::string& calib,
                          const Motion& motion, int frames, double speed, bool gelsight, const Vec2& offset) {
  ordered_json doc;
  doc["name"] = name;
  doc["frames"] = frames;
  doc["output"] = "out/" + name;
  doc["elastomer"] = {{"extent", {0.02, gelsight ? 0.016 : 0.02, 0.005}}, {"spacing", 0.0005}};
  doc["indenter"] = {{"mesh", "indenters/" + mesh + ".stl"},
                     {"mesh_scale", 0.001},
                     {"spacing", 0.0005},
                     {"offset", {offset.x(), offset.y()}},
                     {"gap", 0.0}};
  doc["markers"] = {{"rows", gelsight ? 7 : 9}, {"cols", 9}, {"pitch", 0.002}, {"dot_radius", 0.0008}, {"depth", 0.0}};
  doc["camera"] = "calib/" + calib + ".json";
  doc["simulation"] = {{"dt", 5e-6},
                       {"youngs_modulus", 1.45e5},
                       {"poisson_ratio", 0.45},
                       {"density", 1070.0},
                       {"substeps", 50},
                       {"grid_dx", 0.000625}};
  ordered_json traj = {{"kind", motion.kind}, {"press_depth", motion.depth}, {"speed", speed}};
  if (motion.slip_x != 0.0) traj["slip_vector"] = {motion.slip_x, 0.0, 0.0};
  if (motion.angle_deg != 0.0) {
    traj["rotate_angle_deg"] = motion.angle_deg;
    traj["angular_speed"] = motion.angular_speed;
  }
  doc["trajectory"] = traj;
  return doc.dump(2) + "\n";
}

std::string bytes_to_string(const std::vector<std::byte>& bytes) {
  return std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

}  // namespace

std::vector<FixtureFile> bundled_fixtures() {
  std::vector<FixtureFile> files;
  for (const auto& name : indenter_names()) {
    files.push_back({fs::path("indenters") / (name + ".stl"),
                     bytes_to_string(serialize_stl_binary(make_indenter(name), "tacsim indenter " + name))});
  }
  files.push_back({"calib/sensor_9x9.json", calibration_to_json(sensor_9x9_calibration())});
  files.push_back({"calib/gelsight_mini.json", calibration_to_json(gelsight_mini_calibration())});

  const Motion press{"press", 0.001};
  const Motion slip{"slip", 0.0005, 0.001};
  const Motion rotate{"rotate", 0.0005, 0.0, 20.0, 87.0};
  const Vec2 centered = Vec2::Zero();
  auto add = [&](const std::string& name, const std::string& mesh, const std::string& calib, const Motion& m,
                 int frames, double speed, bool gelsight, const Vec2& offset) {
    files.push_back({name + ".json", scenario_json(name, mesh, calib, m, frames, speed, gelsight, offset)});
  };
  add("press_dotin", "dot_in", "sensor_9x9", press, 20, 0.25, false, centered);
  add("slip_dotin", "dot_in", "sensor_9x9", slip, 26, 0.25, false, centered);
  add("rotate_dotin", "dot_in", "sensor_9x9", rotate, 26, 0.25, false, Vec2(0.001, 0.001));
  add("press_hexagon", "hexagon", "sensor_9x9", press, 20, 0.25, false, centered);
  add("press_pacman", "pacman", "sensor_9x9", press, 20, 0.25, false, centered);
  add("press_cylinder", "cylinder", "sensor_9x9", press, 20, 0.25, false, centered);
  add("press_gelsight_mini", "dot_in", "gelsight_mini", press, 20, 0.25, true, centered);
  add("static_dotin", "dot_in", "sensor_9x9", press, 4, 0.0, false, centered);
  return files;
}

void write_fixtures(const fs::path& dir) {
  for (const auto& f : bundled_fixtures()) write_file_atomic(dir / f.relative_path, std::string_view(f.content));
}

}  // namespace tacsim
