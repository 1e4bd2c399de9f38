#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace tacsim {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Tolerance used when validating user-supplied rotations.
inline constexpr double kRotationTolerance = 1e-9;

// True when R is orthonormal with determinant +1 to within tol.
bool is_rotation(const Mat3& R, double tol = kRotationTolerance);

// Right-handed rotation by `angle` radians about the +z axis.
Mat3 rotation_about_z(double angle);

// Proper rigid motion x -> R x + t.
class RigidTransform {
public:
  RigidTransform() = default;

  // Validates orthonormality; throws ArgumentError otherwise.
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform translation(const Vec3& t) { return {Mat3::Identity(), t}; }

  const Mat3& rotation() const noexcept { return rotation_; }
  const Vec3& translation() const noexcept { return translation_; }

  Vec3 apply(const Vec3& x) const { return rotation_ * x + translation_; }
  Vec3 apply_direction(const Vec3& d) const { return rotation_ * d; }

  // (a * b).apply(x) == a.apply(b.apply(x))
  RigidTransform operator*(const RigidTransform& rhs) const;
  RigidTransform inverse() const;

private:
  Mat3 rotation_ = Mat3::Identity();
  Vec3 translation_ = Vec3::Zero();
};

struct BoundingBox {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  bool empty() const { return (min.array() > max.array()).any(); }
  void expand(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void expand(const BoundingBox& b) {
    if (!b.empty()) {
      expand(b.min);
      expand(b.max);
    }
  }
  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
};

BoundingBox bounding_box(std::span<const Vec3> points);

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;

  BoundingBox bounds() const { return bounding_box(vertices); }
  // Throws ArgumentError if a face index is out of range or a face is degenerate.
  void validate() const;
  // Signed volume via the divergence theorem; positive for outward-oriented meshes.
  double signed_volume() const;
};

TriangleMesh transformed(const TriangleMesh& mesh, const RigidTransform& xf);
TriangleMesh scaled(const TriangleMesh& mesh, double factor);

struct ParticleCloud {
  std::vector<Vec3> positions;
  double spacing = 0.0;

  std::size_t size() const noexcept { return positions.size(); }
  BoundingBox bounds() const { return bounding_box(positions); }
};

// Smallest distance between any two particles (infinity for fewer than two).
double min_pairwise_distance(const ParticleCloud& cloud);

// Regular lattice of ceil(extent/spacing) particles per axis, centered on `center`.
ParticleCloud make_box_cloud(const Vec3& extent, double spacing, const Vec3& center = Vec3::Zero());

struct VolumeSampleReport {
  std::size_t voxels_tested = 0;
  std::size_t parity_disagreements = 0;
  bool suspect_non_watertight = false;
};

// Particles at the centers of lattice voxels that lie inside the mesh. The
// inside test takes a majority vote over parity counts of three axis-aligned
// rays. If more than 5% of voxels see disagreeing rays the mesh is reported
// as suspect (warning on stderr) and the majority result is still returned.
ParticleCloud voxel_sample_volume(const TriangleMesh& mesh, double spacing,
                                  VolumeSampleReport* report = nullptr);

}  // namespace tacsim
