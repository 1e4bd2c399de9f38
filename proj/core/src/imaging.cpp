#include "tacsim/imaging.hpp"

#include "tacsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tacsim {

MaskImage rasterize_mask(std::span<const EllipseFit> fits, int width, int height) {
  MaskImage mask(width, height, 0);
  for (const auto& e : fits) {
    const Vec2 half = 0.5 * e.bounding_rect();
    if (!half.allFinite() || !e.center.allFinite()) continue;
    const int u0 = std::max(0, static_cast<int>(std::floor(e.center.x() - half.x())) - 1);
    const int u1 = std::min(width - 1, static_cast<int>(std::ceil(e.center.x() + half.x())) + 1);
    const int v0 = std::max(0, static_cast<int>(std::floor(e.center.y() - half.y())) - 1);
    const int v1 = std::min(height - 1, static_cast<int>(std::ceil(e.center.y() + half.y())) + 1);
    for (int v = v0; v <= v1; ++v)
      for (int u = u0; u <= u1; ++u)
        if (e.contains(u, v)) mask.at(u, v) = 1;
  }
  return mask;
}

GrayImage render_depth_map(std::span<const Particle> particles, std::span<const std::size_t> surface,
                           const CameraModel& camera) {
  const int w = camera.width();
  const int h = camera.height();
  const double empty = std::numeric_limits<double>::infinity();
  std::vector<double> z(static_cast<std::size_t>(w) * h, empty);

  std::size_t splatted = 0;
  for (auto idx : surface) {
    const Vec3 xc = world_to_camera(camera, particles[idx].x);
    if (!(xc.z() > kCameraZEpsilon)) continue;
    const Vec2 uv = camera_to_pixel(camera, xc);
    const double ur = std::round(uv.x());
    const double vr = std::round(uv.y());
    if (!(ur >= 0.0 && ur < w && vr >= 0.0 && vr < h)) continue;
    auto& cell = z[static_cast<std::size_t>(vr) * w + static_cast<std::size_t>(ur)];
    cell = std::min(cell, xc.z());
    ++splatted;
  }
  if (splatted == 0) throw EmptyFrameError("no surface particle projects into the camera frame");

  // Jacobi-style fill: each pass fills empty pixels from the previous pass
  // only, so the result does not depend on traversal order.
  std::vector<double> next = z;
  for (bool holes = true; holes;) {
    holes = false;
    bool progressed = false;
    for (int v = 0; v < h; ++v)
      for (int u = 0; u < w; ++u) {
        const std::size_t i = static_cast<std::size_t>(v) * w + u;
        if (z[i] != empty) continue;
        double sum = 0.0;
        int count = 0;
        if (u > 0 && z[i - 1] != empty) sum += z[i - 1], ++count;
        if (u + 1 < w && z[i + 1] != empty) sum += z[i + 1], ++count;
        if (v > 0 && z[i - w] != empty) sum += z[i - w], ++count;
        if (v + 1 < h && z[i + w] != empty) sum += z[i + w], ++count;
        if (count > 0) {
          next[i] = sum / count;
          progressed = true;
        } else {
          holes = true;
        }
      }
    z = next;
    if (holes && !progressed) break;
  }

  const auto [lo_it, hi_it] = std::minmax_element(z.begin(), z.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  GrayImage out(w, h, 0.0);
  if (range > 1e-12 * std::max(1.0, std::abs(*hi_it))) {
    for (std::size_t i = 0; i < z.size(); ++i) out.data[i] = (z[i] - lo) / range;
  }
  return out;
}

namespace {

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0))); }

}  // namespace

RgbImage apply_colormap(const GrayImage& depth, Colormap colormap) {
  RgbImage out(depth.width, depth.height);
  if (colormap == Colormap::Gray) {
    for (std::size_t i = 0; i < depth.size(); ++i) {
      const auto g = to_byte(depth.data[i]);
      out.data[i] = {g, g, g};
    }
    return out;
  }

  // Lambertian shading of the height field with a fixed oblique light and a
  // silicone-like tint.
  constexpr double kGain = 24.0;
  const Vec3 light = Vec3(-0.5, -0.5, 1.0).normalized();
  const Vec3 tint(0.92, 0.78, 0.74);
  const int w = depth.width;
  const int h = depth.height;
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const double du = 0.5 * (depth.at(std::min(u + 1, w - 1), v) - depth.at(std::max(u - 1, 0), v));
      const double dv = 0.5 * (depth.at(u, std::min(v + 1, h - 1)) - depth.at(u, std::max(v - 1, 0)));
      const Vec3 normal = Vec3(kGain * du, kGain * dv, 1.0).normalized();
      const double shade = 0.35 + 0.65 * std::max(0.0, normal.dot(light)) / light.z();
      out.at(u, v) = {to_byte(tint.x() * shade), to_byte(tint.y() * shade), to_byte(tint.z() * shade)};
    }
  return out;
}

RgbImage compose_joint_image(const GrayImage& depth, const MaskImage& mask, const Rgb& marker_color,
                             Colormap colormap) {
  if (!mask.same_shape(depth.width, depth.height)) {
    throw ArgumentError("joint image inputs differ in size: depth " + std::to_string(depth.width) + "x" +
                        std::to_string(depth.height) + ", mask " + std::to_string(mask.width) + "x" +
                        std::to_string(mask.height));
  }
  RgbImage out = apply_colormap(depth, colormap);
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask.data[i]) out.data[i] = marker_color;
  return out;
}

}  // namespace tacsim
