#include "tacsim/geometry.hpp"

#include "tacsim/errors.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

namespace tacsim {

bool is_rotation(const Mat3& R, double tol) {
  if (!R.allFinite()) return false;
  const Mat3 gram = R.transpose() * R - Mat3::Identity();
  if (gram.cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(R.determinant() - 1.0) <= tol;
}

Mat3 rotation_about_z(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 R;
  R << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return R;
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!is_rotation(rotation_)) {
    throw ArgumentError("rigid transform rotation is not orthonormal with det +1");
  }
  if (!translation_.allFinite()) {
    throw ArgumentError("rigid transform translation is not finite");
  }
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  RigidTransform out;
  out.rotation_ = rotation_ * rhs.rotation_;
  out.translation_ = rotation_ * rhs.translation_ + translation_;
  return out;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform out;
  out.rotation_ = rotation_.transpose();
  out.translation_ = -(out.rotation_ * translation_);
  return out;
}

BoundingBox bounding_box(std::span<const Vec3> points) {
  BoundingBox box;
  for (const auto& p : points) box.expand(p);
  return box;
}

void TriangleMesh::validate() const {
  const auto n = vertices.size();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const auto& tri = faces[f];
    for (auto idx : tri) {
      if (idx >= n) {
        throw ArgumentError("face " + std::to_string(f) + " references vertex " +
                            std::to_string(idx) + " of " + std::to_string(n));
      }
    }
    const Vec3 e1 = vertices[tri[1]] - vertices[tri[0]];
    const Vec3 e2 = vertices[tri[2]] - vertices[tri[0]];
    if (e1.cross(e2).squaredNorm() == 0.0) {
      throw ArgumentError("face " + std::to_string(f) + " is degenerate");
    }
  }
}

double TriangleMesh::signed_volume() const {
  double six_v = 0.0;
  for (const auto& tri : faces) {
    six_v += vertices[tri[0]].dot(vertices[tri[1]].cross(vertices[tri[2]]));
  }
  return six_v / 6.0;
}

TriangleMesh transformed(const TriangleMesh& mesh, const RigidTransform& xf) {
  TriangleMesh out = mesh;
  for (auto& v : out.vertices) v = xf.apply(v);
  return out;
}

TriangleMesh scaled(const TriangleMesh& mesh, double factor) {
  TriangleMesh out = mesh;
  for (auto& v : out.vertices) v *= factor;
  return out;
}

namespace {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (std::int64_t v : {k.x, k.y, k.z}) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

double min_pairwise_distance(const ParticleCloud& cloud) {
  const auto& pts = cloud.positions;
  double best = std::numeric_limits<double>::infinity();
  if (pts.size() < 2) return best;

  double cell = cloud.spacing;
  if (!(cell > 0.0)) {
    const auto box = cloud.bounds();
    cell = std::max(box.extent().maxCoeff(), 1e-12) / std::cbrt(static_cast<double>(pts.size()));
  }
  std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> cells;
  auto key_of = [cell](const Vec3& p) {
    return CellKey{static_cast<std::int64_t>(std::floor(p.x() / cell)),
                   static_cast<std::int64_t>(std::floor(p.y() / cell)),
                   static_cast<std::int64_t>(std::floor(p.z() / cell))};
  };
  for (std::size_t i = 0; i < pts.size(); ++i) cells[key_of(pts[i])].push_back(i);

  for (std::size_t i = 0; i < pts.size(); ++i) {
    const CellKey k = key_of(pts[i]);
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = cells.find({k.x + dx, k.y + dy, k.z + dz});
          if (it == cells.end()) continue;
          for (auto j : it->second) {
            if (j <= i) continue;
            best = std::min(best, (pts[i] - pts[j]).norm());
          }
        }
  }
  // Nearest pair lies farther than one cell apart: fall back to brute force.
  if (!std::isfinite(best) || best > cell) {
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::min(best, (pts[i] - pts[j]).norm());
  }
  return best;
}

namespace {

int lattice_count(double extent, double spacing) {
  // Guard against 0.02 / 0.0005 evaluating to 40.000000000000007.
  const double ratio = extent / spacing;
  const double n = std::ceil(ratio - 1e-9 * std::max(1.0, ratio));
  return std::max(1, static_cast<int>(n));
}

}  // namespace

ParticleCloud make_box_cloud(const Vec3& extent, double spacing, const Vec3& center) {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ArgumentError("spacing must be positive");
  if (!(extent.array() > 0.0).all() || !extent.allFinite()) {
    throw ArgumentError("box extents must be positive");
  }
  const int nx = lattice_count(extent.x(), spacing);
  const int ny = lattice_count(extent.y(), spacing);
  const int nz = lattice_count(extent.z(), spacing);

  ParticleCloud cloud;
  cloud.spacing = spacing;
  cloud.positions.reserve(static_cast<std::size_t>(nx) * ny * nz);
  const Vec3 first = center - 0.5 * spacing * Vec3(nx - 1, ny - 1, nz - 1);
  // z-fastest ordering keeps vertical columns contiguous.
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      for (int k = 0; k < nz; ++k) cloud.positions.push_back(first + spacing * Vec3(i, j, k));
  return cloud;
}

}  // namespace tacsim
