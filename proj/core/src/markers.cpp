#include "tacsim/markers.hpp"

#include "tacsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tacsim {

inline constexpr std::size_t kMinMarkerParticles = 5;

void MarkerLayout::validate() const {
  if (rows < 1 || cols < 1) throw ArgumentError("marker layout needs at least one row and column");
  if (!(dot_radius > 0.0)) throw ArgumentError("marker dot_radius must be positive");
  if (!(pitch > 2.0 * dot_radius)) throw ArgumentError("marker pitch must exceed twice the dot radius");
  if (!(depth >= 0.0)) throw ArgumentError("marker depth must be non-negative");
}

namespace {

struct Frame {
  Vec3 center;       // footprint center, in the marker plane
  double plane_z;
};

Frame layout_frame(const ParticleCloud& cloud, const MarkerLayout& layout) {
  if (cloud.positions.empty()) throw ArgumentError("empty elastomer cloud");
  const auto box = cloud.bounds();
  const double plane = box.max.z() - layout.depth;
  return {Vec3(box.center().x(), box.center().y(), plane), plane};
}

Vec3 marker_center(const Frame& f, const MarkerLayout& layout, int r, int c) {
  return f.center + layout.pitch * Vec3(c - 0.5 * (layout.cols - 1), r - 0.5 * (layout.rows - 1), 0.0);
}

}  // namespace

std::vector<Vec3> marker_nominal_positions(const ParticleCloud& cloud, const MarkerLayout& layout) {
  layout.validate();
  const Frame f = layout_frame(cloud, layout);
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(layout.rows) * layout.cols);
  for (int r = 0; r < layout.rows; ++r)
    for (int c = 0; c < layout.cols; ++c) out.push_back(marker_center(f, layout, r, c));
  return out;
}

std::vector<MarkerGroup> assign_markers(const ParticleCloud& cloud, const MarkerLayout& layout) {
  layout.validate();
  const double spacing = cloud.spacing;
  if (!(spacing > 0.0)) throw ArgumentError("elastomer cloud has no nominal spacing");
  if (layout.dot_radius < spacing) {
    throw LayoutResolutionError("marker dot_radius " + std::to_string(layout.dot_radius) +
                                " m is smaller than the particle spacing " + std::to_string(spacing) +
                                " m; use a smaller particle spacing");
  }
  const Frame f = layout_frame(cloud, layout);
  const auto centers = marker_nominal_positions(cloud, layout);

  std::vector<MarkerGroup> groups(centers.size());
  for (int r = 0; r < layout.rows; ++r)
    for (int c = 0; c < layout.cols; ++c) groups[static_cast<std::size_t>(r) * layout.cols + c].id = {r, c};

  const double r2 = layout.dot_radius * layout.dot_radius;
  const Vec3 first = centers.front();
  for (std::size_t p = 0; p < cloud.positions.size(); ++p) {
    const Vec3& x = cloud.positions[p];
    if (!(std::abs(x.z() - f.plane_z) < spacing)) continue;
    // Only the markers whose lattice cell is near x can contain it.
    const double fc = (x.x() - first.x()) / layout.pitch;
    const double fr = (x.y() - first.y()) / layout.pitch;
    const int c0 = std::max(0, static_cast<int>(std::floor(fc)) - 1);
    const int c1 = std::min(layout.cols - 1, static_cast<int>(std::floor(fc)) + 2);
    const int r0 = std::max(0, static_cast<int>(std::floor(fr)) - 1);
    const int r1 = std::min(layout.rows - 1, static_cast<int>(std::floor(fr)) + 2);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_group = groups.size();
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c) {
        const std::size_t g = static_cast<std::size_t>(r) * layout.cols + c;
        const double d2 = (x.head<2>() - centers[g].head<2>()).squaredNorm();
        if (d2 <= r2 && d2 < best) {  // strict: equal distance keeps the lower (row, col)
          best = d2;
          best_group = g;
        }
      }
    if (best_group < groups.size()) groups[best_group].particle_indices.push_back(p);
  }

  for (const auto& g : groups) {
    if (g.particle_indices.size() < kMinMarkerParticles) {
      throw LayoutResolutionError("marker (" + std::to_string(g.id.row) + ", " + std::to_string(g.id.col) +
                                  ") has only " + std::to_string(g.particle_indices.size()) +
                                  " particles (need 5); use a smaller particle spacing");
    }
  }
  return groups;
}

std::vector<std::vector<Vec3>> extract_groups(std::span<const Particle> particles,
                                              std::span<const MarkerGroup> groups) {
  std::vector<std::vector<Vec3>> out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    auto& pts = out.emplace_back();
    pts.reserve(g.particle_indices.size());
    for (auto idx : g.particle_indices) pts.push_back(particles[idx].x);
  }
  return out;
}

Vec3 centroid(std::span<const Vec3> points) {
  Vec3 sum = Vec3::Zero();
  for (const auto& p : points) sum += p;
  return points.empty() ? sum : Vec3(sum / static_cast<double>(points.size()));
}

}  // namespace tacsim
