#include "tacsim/errors.hpp"
#include "tacsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

namespace tacsim {

namespace {

struct P2 {
  double x, y;
};

bool lex_less(const P2& a, const P2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }

// Orientation of p against the directed edge a->b. Evaluated with the
// endpoints in lexicographic order so that the two triangles sharing an edge
// see exactly negated values.
double edge_function(const P2& a, const P2& b, const P2& p) {
  const bool flip = lex_less(b, a);
  const P2& lo = flip ? b : a;
  const P2& hi = flip ? a : b;
  const double e = (hi.x - lo.x) * (p.y - lo.y) - (hi.y - lo.y) * (p.x - lo.x);
  return flip ? -e : e;
}

bool is_top_left(const P2& a, const P2& b) { return a.y == b.y ? b.x < a.x : b.y < a.y; }

bool covers(const P2& a, const P2& b, const P2& p) {
  const double e = edge_function(a, b, p);
  return e > 0.0 || (e == 0.0 && is_top_left(a, b));
}

int lattice_count(double extent, double spacing) {
  const double ratio = extent / spacing;
  return std::max(1, static_cast<int>(std::ceil(ratio - 1e-9 * std::max(1.0, ratio))));
}

}  // namespace

ParticleCloud voxel_sample_volume(const TriangleMesh& mesh, double spacing, VolumeSampleReport* report) {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ArgumentError("spacing must be positive");
  mesh.validate();

  ParticleCloud cloud;
  cloud.spacing = spacing;
  if (mesh.faces.empty()) {
    if (report) *report = {};
    return cloud;
  }

  const BoundingBox box = mesh.bounds();
  const std::array<int, 3> n = {lattice_count(box.extent().x(), spacing),
                                lattice_count(box.extent().y(), spacing),
                                lattice_count(box.extent().z(), spacing)};
  const Vec3 first = box.center() - 0.5 * spacing * Vec3(n[0] - 1, n[1] - 1, n[2] - 1);
  auto coord = [&](int axis, int i) { return first[axis] + spacing * i; };
  auto voxel_index = [&](int i, int j, int k) {
    return (static_cast<std::size_t>(i) * n[1] + j) * n[2] + k;
  };

  const std::size_t total = static_cast<std::size_t>(n[0]) * n[1] * n[2];
  std::vector<std::uint8_t> votes(total, 0);

  for (int axis = 0; axis < 3; ++axis) {
    const int ab = (axis + 1) % 3;
    const int ac = (axis + 2) % 3;
    // Crossing coordinates along the ray axis for each (ab, ac) row.
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(n[ab]) * n[ac]);

    for (const auto& tri : mesh.faces) {
      const Vec3& v0 = mesh.vertices[tri[0]];
      const Vec3& v1 = mesh.vertices[tri[1]];
      const Vec3& v2 = mesh.vertices[tri[2]];
      P2 p[3] = {{v0[ab], v0[ac]}, {v1[ab], v1[ac]}, {v2[ab], v2[ac]}};
      double depth[3] = {v0[axis], v1[axis], v2[axis]};
      const double area2 = edge_function(p[0], p[1], p[2]);
      if (area2 == 0.0) continue;  // edge-on to this ray direction
      if (area2 < 0.0) {
        std::swap(p[1], p[2]);
        std::swap(depth[1], depth[2]);
      }
      const double inv_area = 1.0 / std::abs(area2);

      const double lo_b = std::min({p[0].x, p[1].x, p[2].x});
      const double hi_b = std::max({p[0].x, p[1].x, p[2].x});
      const double lo_c = std::min({p[0].y, p[1].y, p[2].y});
      const double hi_c = std::max({p[0].y, p[1].y, p[2].y});
      const int jb0 = std::max(0, static_cast<int>(std::floor((lo_b - first[ab]) / spacing)));
      const int jb1 = std::min(n[ab] - 1, static_cast<int>(std::ceil((hi_b - first[ab]) / spacing)));
      const int jc0 = std::max(0, static_cast<int>(std::floor((lo_c - first[ac]) / spacing)));
      const int jc1 = std::min(n[ac] - 1, static_cast<int>(std::ceil((hi_c - first[ac]) / spacing)));

      for (int jb = jb0; jb <= jb1; ++jb) {
        for (int jc = jc0; jc <= jc1; ++jc) {
          const P2 q{coord(ab, jb), coord(ac, jc)};
          if (!covers(p[1], p[2], q) || !covers(p[2], p[0], q) || !covers(p[0], p[1], q)) continue;
          const double l0 = edge_function(p[1], p[2], q) * inv_area;
          const double l1 = edge_function(p[2], p[0], q) * inv_area;
          const double l2 = 1.0 - l0 - l1;
          rows[static_cast<std::size_t>(jb) * n[ac] + jc].push_back(l0 * depth[0] + l1 * depth[1] + l2 * depth[2]);
        }
      }
    }

    for (int jb = 0; jb < n[ab]; ++jb) {
      for (int jc = 0; jc < n[ac]; ++jc) {
        auto& crossings = rows[static_cast<std::size_t>(jb) * n[ac] + jc];
        if (crossings.empty()) continue;
        std::sort(crossings.begin(), crossings.end());
        for (int i = 0; i < n[axis]; ++i) {
          const double x = coord(axis, i);
          const auto beyond = crossings.end() - std::upper_bound(crossings.begin(), crossings.end(), x);
          if (beyond % 2 == 1) {
            int idx[3];
            idx[axis] = i;
            idx[ab] = jb;
            idx[ac] = jc;
            ++votes[voxel_index(idx[0], idx[1], idx[2])];
          }
        }
      }
    }
  }

  std::size_t disagreements = 0;
  for (int i = 0; i < n[0]; ++i)
    for (int j = 0; j < n[1]; ++j)
      for (int k = 0; k < n[2]; ++k) {
        const auto v = votes[voxel_index(i, j, k)];
        if (v == 1 || v == 2) ++disagreements;
        if (v >= 2) cloud.positions.push_back(first + spacing * Vec3(i, j, k));
      }

  const bool suspect = static_cast<double>(disagreements) > 0.05 * static_cast<double>(total);
  if (suspect) {
    std::fprintf(stderr, "warning: mesh may not be watertight (%zu of %zu voxels had disagreeing ray parity)\n",
                 disagreements, total);
  }
  if (report) *report = {total, disagreements, suspect};
  return cloud;
}

}  // namespace tacsim
