#pragma once

#include "tacsim/camera.hpp"
#include "tacsim/geometry.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tacsim {

// Prism over a polygon `ring` (counter-clockwise, in the xy plane) from z = 0
// to z = height. Caps are fanned from `fan_center`, which must see every ring
// vertex.
TriangleMesh extrude_profile(std::span<const Vec2> ring, const Vec2& fan_center, double height);

// Bundled indenters in millimetres: dot_in, pacman, hexagon, cylinder.
// Throws ArgumentError for other names.
TriangleMesh make_indenter(std::string_view name);
std::vector<std::string> indenter_names();

CameraModel sensor_9x9_calibration();
CameraModel gelsight_mini_calibration();

struct FixtureFile {
  std::filesystem::path relative_path;
  std::string content;  // raw bytes
};

// Indenter STLs, calibrations and example scenarios, laid out as
//   indenters/*.stl, calib/*.json, *.json (scenarios).
std::vector<FixtureFile> bundled_fixtures();
void write_fixtures(const std::filesystem::path& dir);

}  // namespace tacsim
