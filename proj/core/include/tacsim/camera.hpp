#pragma once

#include "tacsim/geometry.hpp"

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace tacsim {

// Points closer to the image plane than this are treated as behind the camera.
inline constexpr double kCameraZEpsilon = 1e-6;

// Ideal pinhole camera: x_c = R x_w + t, u = fx X/Z + cx, v = fy Y/Z + cy.
// Pixel centers sit at integer coordinates.
class CameraModel {
public:
  // Throws SchemaError naming the offending field.
  CameraModel(const Mat3& rotation, const Vec3& translation, double fx, double fy, double cx, double cy,
              int width, int height);

  const Mat3& rotation() const noexcept { return R_; }
  const Vec3& translation() const noexcept { return t_; }
  double fx() const noexcept { return fx_; }
  double fy() const noexcept { return fy_; }
  double cx() const noexcept { return cx_; }
  double cy() const noexcept { return cy_; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  Mat3 intrinsic_matrix() const;

private:
  Mat3 R_;
  Vec3 t_;
  double fx_, fy_, cx_, cy_;
  int width_, height_;
};

// JSON calibration: rotation (9, row-major), translation (3, m), fx, fy, cx,
// cy, width, height. Distortion entries are rejected.
CameraModel parse_calibration(std::string_view json_text);
CameraModel load_calibration(const std::filesystem::path& path);
std::string calibration_to_json(const CameraModel& model);

Vec3 world_to_camera(const CameraModel& model, const Vec3& x_world);

// Throws BehindCameraError when Z <= kCameraZEpsilon.
Vec2 camera_to_pixel(const CameraModel& model, const Vec3& x_camera);

struct Projection {
  Vec2 pixel;    // NaN for points behind the camera
  bool visible;  // in front of the camera and inside [0, width) x [0, height)
};

std::vector<Projection> project_points(const CameraModel& model, std::span<const Vec3> points_world);

}  // namespace tacsim
