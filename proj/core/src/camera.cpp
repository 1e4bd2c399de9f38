#include "tacsim/camera.hpp"

#include "tacsim/errors.hpp"
#include "tacsim/io.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>

namespace tacsim {

using nlohmann::json;

CameraModel::CameraModel(const Mat3& rotation, const Vec3& translation, double fx, double fy, double cx,
                         double cy, int width, int height)
    : R_(rotation), t_(translation), fx_(fx), fy_(fy), cx_(cx), cy_(cy), width_(width), height_(height) {
  if (!is_rotation(R_)) throw SchemaError("rotation", "must be orthonormal with determinant +1");
  if (!t_.allFinite()) throw SchemaError("translation", "must be finite");
  if (!(fx_ > 0.0) || !std::isfinite(fx_)) throw SchemaError("fx", "focal length must be positive");
  if (!(fy_ > 0.0) || !std::isfinite(fy_)) throw SchemaError("fy", "focal length must be positive");
  if (width_ < 1) throw SchemaError("width", "must be at least 1 pixel");
  if (height_ < 1) throw SchemaError("height", "must be at least 1 pixel");
  if (!(cx_ >= 0.0 && cx_ < width_)) throw SchemaError("cx", "principal point must lie in [0, width)");
  if (!(cy_ >= 0.0 && cy_ < height_)) throw SchemaError("cy", "principal point must lie in [0, height)");
}

Mat3 CameraModel::intrinsic_matrix() const {
  Mat3 K;
  K << fx_, 0.0, cx_,
       0.0, fy_, cy_,
       0.0, 0.0, 1.0;
  return K;
}

namespace {

const json& require(const json& doc, const char* field) {
  if (!doc.contains(field)) throw SchemaError(field, "missing");
  return doc.at(field);
}

double number_field(const json& doc, const char* field) {
  const auto& v = require(doc, field);
  if (!v.is_number()) throw SchemaError(field, "must be a number");
  return v.get<double>();
}

int integer_field(const json& doc, const char* field) {
  const auto& v = require(doc, field);
  if (!v.is_number_integer()) throw SchemaError(field, "must be an integer");
  return v.get<int>();
}

std::vector<double> array_field(const json& doc, const char* field, std::size_t n) {
  const auto& v = require(doc, field);
  if (!v.is_array() || v.size() != n) throw SchemaError(field, "must be an array of " + std::to_string(n) + " numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw SchemaError(field, "must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

CameraModel parse_calibration(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("calibration is not valid JSON: ") + e.what(), e.byte);
  }
  if (!doc.is_object()) throw SchemaError("<root>", "calibration must be a JSON object");
  for (const char* key : {"distortion", "dist_coeffs", "distortion_coefficients"}) {
    if (doc.contains(key)) {
      throw SchemaError(key, "lens distortion is not supported; the camera is an ideal pinhole");
    }
  }
  const auto r = array_field(doc, "rotation", 9);
  const auto t = array_field(doc, "translation", 3);
  Mat3 R;
  R << r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8];
  return CameraModel(R, Vec3(t[0], t[1], t[2]), number_field(doc, "fx"), number_field(doc, "fy"),
                     number_field(doc, "cx"), number_field(doc, "cy"), integer_field(doc, "width"),
                     integer_field(doc, "height"));
}

CameraModel load_calibration(const std::filesystem::path& path) {
  return parse_calibration(read_text_file(path));
}

std::string calibration_to_json(const CameraModel& model) {
  json doc;
  const Mat3& R = model.rotation();
  doc["rotation"] = {R(0, 0), R(0, 1), R(0, 2), R(1, 0), R(1, 1), R(1, 2), R(2, 0), R(2, 1), R(2, 2)};
  doc["translation"] = {model.translation().x(), model.translation().y(), model.translation().z()};
  doc["fx"] = model.fx();
  doc["fy"] = model.fy();
  doc["cx"] = model.cx();
  doc["cy"] = model.cy();
  doc["width"] = model.width();
  doc["height"] = model.height();
  return doc.dump(2) + "\n";
}

Vec3 world_to_camera(const CameraModel& model, const Vec3& x_world) {
  return model.rotation() * x_world + model.translation();
}

Vec2 camera_to_pixel(const CameraModel& model, const Vec3& x_camera) {
  const double Z = x_camera.z();
  if (!(Z > kCameraZEpsilon)) {
    throw BehindCameraError("point (" + format_double(x_camera.x()) + ", " + format_double(x_camera.y()) + ", " +
                            format_double(Z) + ") is behind the camera");
  }
  return {model.fx() * (x_camera.x() / Z) + model.cx(), model.fy() * (x_camera.y() / Z) + model.cy()};
}

std::vector<Projection> project_points(const CameraModel& model, std::span<const Vec3> points_world) {
  std::vector<Projection> out;
  out.reserve(points_world.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& p : points_world) {
    const Vec3 xc = world_to_camera(model, p);
    if (!(xc.z() > kCameraZEpsilon)) {
      out.push_back({Vec2(nan, nan), false});
      continue;
    }
    const Vec2 uv = camera_to_pixel(model, xc);
    const bool inside = uv.x() >= 0.0 && uv.x() < model.width() && uv.y() >= 0.0 && uv.y() < model.height();
    out.push_back({uv, inside});
  }
  return out;
}

}  // namespace tacsim
