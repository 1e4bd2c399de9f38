#pragma once

#include "tacsim/geometry.hpp"
#include "tacsim/mpm.hpp"

#include <cstddef>
#include <compare>
#include <span>
#include <vector>

namespace tacsim {

struct MarkerId {
  int row = 0;
  int col = 0;
  auto operator<=>(const MarkerId&) const = default;
};

// Regular array of printed dots. Marker (r, c) is centred at
//   footprint_center + pitch * (c - (cols - 1) / 2, r - (rows - 1) / 2)
// in the horizontal plane, `depth` below the contact surface of the elastomer.
struct MarkerLayout {
  int rows = 9;
  int cols = 9;
  double pitch = 0.002;       // m
  double dot_radius = 0.0008; // m
  double depth = 0.0;         // m below the surface layer

  void validate() const;
};

struct MarkerGroup {
  MarkerId id;
  std::vector<std::size_t> particle_indices;
};

// Nominal rest position of every marker in row-major order.
std::vector<Vec3> marker_nominal_positions(const ParticleCloud& cloud, const MarkerLayout& layout);

// Row-major groups. A particle joins (r, c) when its horizontal distance to
// the marker center is <= dot_radius and it lies strictly less than one
// spacing from the marker plane; the nearest center wins, ties go to the
// lower (row, col). Throws LayoutResolutionError when a group has fewer
// than 5 particles or dot_radius < spacing.
std::vector<MarkerGroup> assign_markers(const ParticleCloud& cloud, const MarkerLayout& layout);

// Current positions of each group's members, in group order.
std::vector<std::vector<Vec3>> extract_groups(std::span<const Particle> particles,
                                              std::span<const MarkerGroup> groups);

Vec3 centroid(std::span<const Vec3> points);

}  // namespace tacsim
