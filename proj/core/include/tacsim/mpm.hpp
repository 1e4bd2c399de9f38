#pragma once

#include "tacsim/constitutive.hpp"
#include "tacsim/geometry.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace tacsim {

enum class ParticleRole : std::uint8_t { Elastomer, RigidIndenter };

struct Particle {
  Vec3 x = Vec3::Zero();       // position (m)
  Vec3 v = Vec3::Zero();       // velocity (m/s)
  Mat3 C = Mat3::Zero();       // affine velocity (1/s)
  Mat3 F = Mat3::Identity();   // deformation gradient
  double mass = 0.0;           // kg
  double volume0 = 0.0;        // rest volume (m^3)
  ParticleRole role = ParticleRole::Elastomer;
  std::int32_t marker = -1;    // marker group index, -1 when untagged
};

enum class NodeCondition : std::uint8_t { Free, Sticky, RigidVelocity };

// Dense background grid. Node (i, j, k) sits at origin + dx * (i, j, k);
// storage is z-fastest.
class SimGrid {
public:
  SimGrid() = default;
  SimGrid(const std::array<int, 3>& dims, double dx, const Vec3& origin);

  // Grid covering `box` plus `margin` node intervals on every side.
  static SimGrid enclosing(const BoundingBox& box, double dx, int margin = 4);

  const std::array<int, 3>& dims() const noexcept { return dims_; }
  double dx() const noexcept { return dx_; }
  const Vec3& origin() const noexcept { return origin_; }
  std::size_t node_count() const noexcept { return mass.size(); }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + k;
  }
  std::array<int, 3> coords(std::size_t index) const;
  Vec3 node_position(int i, int j, int k) const { return origin_ + dx_ * Vec3(i, j, k); }
  Vec3 node_position(std::size_t index) const;

  // Zeroes mass, momentum and velocity and resets per-step conditions to the
  // persistent ones.
  void clear();

  // Conditions that survive clear() (the glued elastomer base).
  void set_persistent_condition(std::size_t node, NodeCondition c);
  NodeCondition persistent_condition(std::size_t node) const { return persistent_[node]; }

  std::vector<double> mass;                 // M_i (kg)
  std::vector<Vec3> momentum;               // MG_i (kg m/s)
  std::vector<Vec3> velocity;               // V_i (m/s)
  std::vector<NodeCondition> condition;     // per-step boundary condition
  std::vector<Vec3> prescribed_velocity;    // used where condition == RigidVelocity

private:
  std::array<int, 3> dims_{0, 0, 0};
  double dx_ = 0.0;
  Vec3 origin_ = Vec3::Zero();
  std::vector<NodeCondition> persistent_;
};

struct SimConfig {
  double dt = 1e-4;               // s
  double youngs_modulus = 1.45e5; // Pa
  double poisson_ratio = 0.45;
  double density = 1070.0;        // kg/m^3
  Vec3 gravity = Vec3::Zero();    // m/s^2
  int substeps = 50;              // engine steps per output frame
  bool elasticity = true;         // include the elastic momentum term
  double mass_epsilon = 1e-20;    // kg; lighter nodes are treated as empty

  // Throws ArgumentError on dt <= 0, E <= 0, nu outside [0, 0.5), substeps < 1.
  void validate() const;
  LameParameters lame() const { return LameParameters::from_youngs(youngs_modulus, poisson_ratio); }
  // Rough explicit stability bound 0.3 dx / c_p for the dilatational wave speed.
  double stable_time_step(double dx) const;
};

// The 27 quadratic B-spline weights of one particle.
struct KernelStencil {
  std::array<std::size_t, 27> node{};
  std::array<double, 27> weight{};
  std::array<Vec3, 27> offset{};  // X_i - x_p (m)
};

// Throws OutOfDomainError when x lies within 1.5 dx of the grid boundary.
KernelStencil kernel_weights(const Vec3& x, const SimGrid& grid, std::size_t particle = 0);

// Scatter mass and momentum (APIC + MLS elastic term) onto a cleared grid.
// Rigid particles contribute mass and prescribed-velocity momentum only.
void particle_to_grid(std::span<const Particle> particles, SimGrid& grid, const SimConfig& config);

// V_i = MG_i / M_i, gravity, then boundary conditions.
void grid_update(SimGrid& grid, const SimConfig& config);

// Gathers v_p and C_p for elastomer particles; rigid particles keep their
// prescribed velocity and zero affine field.
void grid_to_particle(std::span<Particle> particles, const SimGrid& grid, const SimConfig& config);

// F <- (I + dt C) F for elastomer particles, x <- x + dt v for all.
void update_deformation_and_advect(std::span<Particle> particles, const SimConfig& config);

// Rigid indenter state at one engine step. Point velocities follow
// v + omega e_z x (X - pivot).
struct IndenterKinematics {
  RigidTransform pose;                 // indenter-local -> world
  Vec3 linear_velocity = Vec3::Zero(); // m/s
  double angular_velocity = 0.0;       // rad/s about world +z
  Vec3 pivot = Vec3::Zero();           // point on the rotation axis (world)

  Vec3 point_velocity(const Vec3& X) const;
};

using IndenterDriver = std::function<IndenterKinematics(std::int64_t step)>;

// Particles [first, first + local.size()) are rigid and follow `driver`.
struct RigidIndenter {
  std::size_t first = 0;
  std::vector<Vec3> local;  // indenter-local rest coordinates
  IndenterDriver driver;
};

struct Scene {
  std::vector<Particle> particles;
  SimGrid grid;
  SimConfig config;
  std::optional<RigidIndenter> indenter;
  std::int64_t step_index = 0;

  double elastomer_mass() const;
};

// Marks the grid nodes supporting the lowest elastomer particle layer as
// persistently sticky.
void glue_elastomer_base(Scene& scene);

// Places rigid particles at the driver's pose for the current step.
void sync_indenter(Scene& scene);

// Tags grid nodes within one dx of any rigid particle with the indenter's
// point velocity (persistent sticky nodes keep priority).
void tag_rigid_nodes(const Scene& scene, SimGrid& grid, const IndenterKinematics& kin);

// One explicit MLS-MPM step. Errors are rethrown as StepError with the index.
void step(Scene& scene);

// Flat little-endian dump: uint64 count, then per particle x[3], v[3], F[9]
// (row-major) as float64.
void write_particle_dump(const std::filesystem::path& path, std::span<const Particle> particles);

struct ParticleDumpRecord {
  Vec3 x, v;
  Mat3 F;
};
std::vector<ParticleDumpRecord> read_particle_dump(const std::filesystem::path& path);

}  // namespace tacsim
