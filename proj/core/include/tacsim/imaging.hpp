#pragma once

#include "tacsim/camera.hpp"
#include "tacsim/geometry.hpp"
#include "tacsim/image.hpp"
#include "tacsim/mpm.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace tacsim {

// Ellipse in pixel coordinates. `angle` is the direction of the major axis
// measured from +u towards +v, in [0, pi).
struct EllipseFit {
  Vec2 center = Vec2::Zero();
  double a = 0.0;  // semi-major axis (px)
  double b = 0.0;  // semi-minor axis (px)
  double angle = 0.0;

  // Axis-aligned extent (w, h) of the ellipse.
  Vec2 bounding_rect() const;
  // Pixel-center inside test on the implicit conic.
  bool contains(double u, double v) const;

  static EllipseFit disc(const Vec2& center, double radius);
};

// Direct least-squares conic fit constrained to ellipses (4AC - B^2 = 1),
// solved in the numerically stable block form on centred, scaled points.
// Throws InsufficientPointsError for fewer than 5 points and
// DegenerateFitError for collinear or non-elliptic input.
EllipseFit fit_ellipse(std::span<const Vec2> points);

// fit_ellipse, falling back to a disc of radius equal to the RMS distance
// from the centroid (at least 0.5 px) when the fit is degenerate.
EllipseFit fit_ellipse_or_disc(std::span<const Vec2> points);

// Pixel (u, v) is set iff its center lies inside any ellipse.
MaskImage rasterize_mask(std::span<const EllipseFit> fits, int width, int height);

// Nearest-Z splat of `surface` particles followed by 4-neighbour hole
// filling; the result is (Z - Zmin) / (Zmax - Zmin), or zero for a flat
// frame. Throws EmptyFrameError when no particle lands in the frame.
GrayImage render_depth_map(std::span<const Particle> particles, std::span<const std::size_t> surface,
                           const CameraModel& camera);

enum class Colormap { Gray, Lambertian };

RgbImage apply_colormap(const GrayImage& depth, Colormap colormap);

// Colormapped depth with every mask pixel overwritten by marker_color.
RgbImage compose_joint_image(const GrayImage& depth, const MaskImage& mask, const Rgb& marker_color,
                             Colormap colormap);

}  // namespace tacsim
