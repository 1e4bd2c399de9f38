#include "tacsim/mpm.hpp"

#include "tacsim/errors.hpp"
#include "tacsim/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

namespace tacsim {

// ---------------------------------------------------------------------------
// Grid

SimGrid::SimGrid(const std::array<int, 3>& dims, double dx, const Vec3& origin)
    : dims_(dims), dx_(dx), origin_(origin) {
  if (!(dx > 0.0)) throw ArgumentError("grid dx must be positive");
  for (int d : dims) {
    if (d < 6) throw ArgumentError("grid needs at least 6 nodes per axis");
  }
  const std::size_t n = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  mass.assign(n, 0.0);
  momentum.assign(n, Vec3::Zero());
  velocity.assign(n, Vec3::Zero());
  condition.assign(n, NodeCondition::Free);
  prescribed_velocity.assign(n, Vec3::Zero());
  persistent_.assign(n, NodeCondition::Free);
}

SimGrid SimGrid::enclosing(const BoundingBox& box, double dx, int margin) {
  if (box.empty()) throw ArgumentError("cannot size a grid around an empty box");
  const Vec3 origin = box.min - margin * dx * Vec3::Ones();
  std::array<int, 3> dims{};
  for (int a = 0; a < 3; ++a) {
    dims[a] = static_cast<int>(std::ceil(box.extent()[a] / dx)) + 2 * margin + 1;
  }
  return SimGrid(dims, dx, origin);
}

std::array<int, 3> SimGrid::coords(std::size_t index) const {
  const int k = static_cast<int>(index % dims_[2]);
  index /= dims_[2];
  const int j = static_cast<int>(index % dims_[1]);
  const int i = static_cast<int>(index / dims_[1]);
  return {i, j, k};
}

Vec3 SimGrid::node_position(std::size_t index) const {
  const auto c = coords(index);
  return node_position(c[0], c[1], c[2]);
}

void SimGrid::clear() {
  std::fill(mass.begin(), mass.end(), 0.0);
  std::fill(momentum.begin(), momentum.end(), Vec3::Zero());
  std::fill(velocity.begin(), velocity.end(), Vec3::Zero());
  std::copy(persistent_.begin(), persistent_.end(), condition.begin());
}

void SimGrid::set_persistent_condition(std::size_t node, NodeCondition c) {
  persistent_[node] = c;
  condition[node] = c;
}

// ---------------------------------------------------------------------------
// Config

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ArgumentError("dt must be positive");
  if (!(youngs_modulus > 0.0)) throw ArgumentError("youngs_modulus must be positive");
  if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5)) throw ArgumentError("poisson_ratio must lie in [0, 0.5)");
  if (!(density > 0.0)) throw ArgumentError("density must be positive");
  if (substeps < 1) throw ArgumentError("substeps must be at least 1");
  if (!gravity.allFinite()) throw ArgumentError("gravity must be finite");
}

double SimConfig::stable_time_step(double dx) const {
  const auto l = lame();
  const double wave_speed = std::sqrt((l.lambda + 2.0 * l.mu) / density);
  return 0.3 * dx / wave_speed;
}

// ---------------------------------------------------------------------------
// Kernel

namespace {

// Quadratic B-spline weights along one axis for nodes base, base+1, base+2.
struct AxisStencil {
  int base = 0;
  double w[3] = {0.0, 0.0, 0.0};
  double d[3] = {0.0, 0.0, 0.0};  // node coordinate minus particle coordinate (m)
};

inline bool axis_stencil(double x, double origin, double inv_dx, double dx, int nodes, AxisStencil& s) {
  const double q = (x - origin) * inv_dx;
  if (!(q >= 1.5 && q <= nodes - 2.5)) return false;
  s.base = static_cast<int>(std::floor(q - 0.5));
  const double f = q - s.base;
  const double a = 1.5 - f;
  const double b = f - 1.0;
  const double c = f - 0.5;
  s.w[0] = 0.5 * a * a;
  s.w[1] = 0.75 - b * b;
  s.w[2] = 0.5 * c * c;
  s.d[0] = -f * dx;
  s.d[1] = (1.0 - f) * dx;
  s.d[2] = (2.0 - f) * dx;
  return true;
}

struct Stencil3 {
  AxisStencil ax[3];
};

inline bool make_stencil(const Vec3& x, const SimGrid& grid, double inv_dx, Stencil3& s) {
  const auto& dims = grid.dims();
  const double dx = grid.dx();
  const Vec3& o = grid.origin();
  return axis_stencil(x.x(), o.x(), inv_dx, dx, dims[0], s.ax[0]) &&
         axis_stencil(x.y(), o.y(), inv_dx, dx, dims[1], s.ax[1]) &&
         axis_stencil(x.z(), o.z(), inv_dx, dx, dims[2], s.ax[2]);
}

[[noreturn]] void throw_out_of_domain(std::size_t particle, const Vec3& x, const SimGrid& grid) {
  const Vec3 lo = grid.origin() + 1.5 * grid.dx() * Vec3::Ones();
  const Vec3 hi = grid.origin() + grid.dx() * Vec3(grid.dims()[0] - 2.5, grid.dims()[1] - 2.5, grid.dims()[2] - 2.5);
  throw OutOfDomainError(particle, "position (" + format_double(x.x()) + ", " + format_double(x.y()) + ", " +
                                       format_double(x.z()) + ") outside interior [" + format_double(lo.x()) + ", " +
                                       format_double(hi.x()) + "] x [" + format_double(lo.y()) + ", " +
                                       format_double(hi.y()) + "] x [" + format_double(lo.z()) + ", " +
                                       format_double(hi.z()) + "]");
}

// x-slabs two nodes wide; slabs of equal parity touch disjoint node sets.
constexpr int kSlabWidth = 2;

}  // namespace

KernelStencil kernel_weights(const Vec3& x, const SimGrid& grid, std::size_t particle) {
  Stencil3 s;
  if (!make_stencil(x, grid, 1.0 / grid.dx(), s)) throw_out_of_domain(particle, x, grid);
  KernelStencil out;
  int n = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k, ++n) {
        out.node[n] = grid.index(s.ax[0].base + i, s.ax[1].base + j, s.ax[2].base + k);
        out.weight[n] = s.ax[0].w[i] * s.ax[1].w[j] * s.ax[2].w[k];
        out.offset[n] = Vec3(s.ax[0].d[i], s.ax[1].d[j], s.ax[2].d[k]);
      }
  return out;
}

// ---------------------------------------------------------------------------
// Transfers

void particle_to_grid(std::span<const Particle> particles, SimGrid& grid, const SimConfig& config) {
  const double dx = grid.dx();
  const double inv_dx = 1.0 / dx;
  const std::size_t np = particles.size();
  const auto& dims = grid.dims();

  // Bin particles into x-slabs (stable, so each slab keeps index order) and
  // check the domain up front: nothing may throw inside the parallel loops.
  const int slabs = (dims[0] + kSlabWidth - 1) / kSlabWidth;
  std::vector<std::uint32_t> slab_of(np);
  std::vector<std::size_t> slab_start(static_cast<std::size_t>(slabs) + 1, 0);
  for (std::size_t p = 0; p < np; ++p) {
    Stencil3 s;
    if (!make_stencil(particles[p].x, grid, inv_dx, s)) throw_out_of_domain(p, particles[p].x, grid);
    slab_of[p] = static_cast<std::uint32_t>(s.ax[0].base / kSlabWidth);
    ++slab_start[slab_of[p] + 1];
  }
  for (int s = 0; s < slabs; ++s) slab_start[s + 1] += slab_start[s];
  std::vector<std::size_t> order(np);
  {
    std::vector<std::size_t> cursor(slab_start.begin(), slab_start.end() - 1);
    for (std::size_t p = 0; p < np; ++p) order[cursor[slab_of[p]]++] = p;
  }

  // Per-particle affine momentum matrix: m C - dt (4 / dx^2) V0 S.
  std::vector<Mat3> affine(np);
  std::vector<std::uint8_t> inverted(np, 0);
  const LameParameters lame = config.lame();
  const double stress_scale = -config.dt * 4.0 * inv_dx * inv_dx;
  const std::int64_t n_signed = static_cast<std::int64_t>(np);
#pragma omp parallel for schedule(static)
  for (std::int64_t ps = 0; ps < n_signed; ++ps) {
    const auto p = static_cast<std::size_t>(ps);
    const Particle& part = particles[p];
    if (part.role == ParticleRole::RigidIndenter) {
      affine[p] = part.mass * part.C;
      continue;
    }
    Mat3 a = part.mass * part.C;
    if (config.elasticity) {
      const double J = part.F.determinant();
      if (!(J > 0.0)) {
        inverted[p] = 1;
        affine[p] = a;
        continue;
      }
      a += (stress_scale * part.volume0) * compute_stress(part.F, lame, p);
    }
    affine[p] = a;
  }
  for (std::size_t p = 0; p < np; ++p) {
    if (inverted[p]) throw InvertedElementError(p, particles[p].F.determinant());
  }

  double* mass = grid.mass.data();
  Vec3* momentum = grid.momentum.data();
  const std::size_t stride_i = static_cast<std::size_t>(dims[1]) * dims[2];
  const std::size_t stride_j = static_cast<std::size_t>(dims[2]);

  for (int color = 0; color < 2; ++color) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int s = color; s < slabs; s += 2) {
      for (std::size_t o = slab_start[s]; o < slab_start[s + 1]; ++o) {
        const std::size_t p = order[o];
        const Particle& part = particles[p];
        Stencil3 st;
        make_stencil(part.x, grid, inv_dx, st);
        const Mat3& A = affine[p];
        const Vec3 mv = part.mass * part.v;
        Vec3 ax[3], ay[3], az[3];
        for (int q = 0; q < 3; ++q) {
          ax[q] = A.col(0) * st.ax[0].d[q];
          ay[q] = A.col(1) * st.ax[1].d[q];
          az[q] = A.col(2) * st.ax[2].d[q];
        }
        const std::size_t base = st.ax[0].base * stride_i + st.ax[1].base * stride_j + st.ax[2].base;
        for (int i = 0; i < 3; ++i) {
          const double wi = st.ax[0].w[i];
          const Vec3 mvi = mv + ax[i];
          for (int j = 0; j < 3; ++j) {
            const double wij = wi * st.ax[1].w[j];
            const Vec3 mvij = mvi + ay[j];
            const std::size_t row = base + i * stride_i + j * stride_j;
            for (int k = 0; k < 3; ++k) {
              const double w = wij * st.ax[2].w[k];
              mass[row + k] += w * part.mass;
              momentum[row + k] += w * (mvij + az[k]);
            }
          }
        }
      }
    }
  }
}

void grid_update(SimGrid& grid, const SimConfig& config) {
  const std::int64_t n = static_cast<std::int64_t>(grid.node_count());
  const Vec3 dv = config.gravity * config.dt;
  const double eps = config.mass_epsilon;
#pragma omp parallel for schedule(static)
  for (std::int64_t ns = 0; ns < n; ++ns) {
    const auto i = static_cast<std::size_t>(ns);
    Vec3 v = Vec3::Zero();
    if (grid.mass[i] > eps) v = grid.momentum[i] / grid.mass[i] + dv;
    switch (grid.condition[i]) {
      case NodeCondition::Free:
        break;
      case NodeCondition::Sticky:
        v.setZero();
        break;
      case NodeCondition::RigidVelocity:
        v = grid.prescribed_velocity[i];
        break;
    }
    grid.velocity[i] = v;
  }
}

void grid_to_particle(std::span<Particle> particles, const SimGrid& grid, const SimConfig&) {
  const double inv_dx = 1.0 / grid.dx();
  const double apic_scale = 4.0 * inv_dx * inv_dx;
  const auto& dims = grid.dims();
  const std::size_t stride_i = static_cast<std::size_t>(dims[1]) * dims[2];
  const std::size_t stride_j = static_cast<std::size_t>(dims[2]);
  const Vec3* velocity = grid.velocity.data();

  const std::size_t np = particles.size();
  for (std::size_t p = 0; p < np; ++p) {
    Stencil3 st;
    if (!make_stencil(particles[p].x, grid, inv_dx, st)) throw_out_of_domain(p, particles[p].x, grid);
  }

  const std::int64_t n_signed = static_cast<std::int64_t>(np);
#pragma omp parallel for schedule(static)
  for (std::int64_t ps = 0; ps < n_signed; ++ps) {
    Particle& part = particles[static_cast<std::size_t>(ps)];
    if (part.role == ParticleRole::RigidIndenter) {
      part.C.setZero();
      continue;
    }
    Stencil3 st;
    make_stencil(part.x, grid, inv_dx, st);
    Vec3 v = Vec3::Zero();
    Mat3 B = Mat3::Zero();
    const std::size_t base = st.ax[0].base * stride_i + st.ax[1].base * stride_j + st.ax[2].base;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double wij = st.ax[0].w[i] * st.ax[1].w[j];
        const std::size_t row = base + i * stride_i + j * stride_j;
        for (int k = 0; k < 3; ++k) {
          const Vec3 wv = (wij * st.ax[2].w[k]) * velocity[row + k];
          v += wv;
          B.col(0) += wv * st.ax[0].d[i];
          B.col(1) += wv * st.ax[1].d[j];
          B.col(2) += wv * st.ax[2].d[k];
        }
      }
    }
    part.v = v;
    part.C = apic_scale * B;
  }
}

void update_deformation_and_advect(std::span<Particle> particles, const SimConfig& config) {
  const double dt = config.dt;
  const std::size_t np = particles.size();
  std::vector<std::uint8_t> inverted(np, 0);
  const std::int64_t n_signed = static_cast<std::int64_t>(np);
#pragma omp parallel for schedule(static)
  for (std::int64_t ps = 0; ps < n_signed; ++ps) {
    const auto p = static_cast<std::size_t>(ps);
    Particle& part = particles[p];
    if (part.role == ParticleRole::Elastomer) {
      const Mat3 F = (Mat3::Identity() + dt * part.C) * part.F;
      if (!(F.determinant() > 0.0)) inverted[p] = 1;
      part.F = F;
    } else {
      part.F.setIdentity();
    }
    part.x += dt * part.v;
  }
  for (std::size_t p = 0; p < np; ++p) {
    if (inverted[p]) throw InvertedElementError(p, particles[p].F.determinant());
  }
}

// ---------------------------------------------------------------------------
// Scene

Vec3 IndenterKinematics::point_velocity(const Vec3& X) const {
  const Vec3 r = X - pivot;
  return linear_velocity + angular_velocity * Vec3(-r.y(), r.x(), 0.0);
}

double Scene::elastomer_mass() const {
  double m = 0.0;
  for (const auto& p : particles)
    if (p.role == ParticleRole::Elastomer) m += p.mass;
  return m;
}

void glue_elastomer_base(Scene& scene) {
  double z_min = std::numeric_limits<double>::infinity();
  double spacing_hint = std::numeric_limits<double>::infinity();
  for (const auto& p : scene.particles)
    if (p.role == ParticleRole::Elastomer) z_min = std::min(z_min, p.x.z());
  if (!std::isfinite(z_min)) return;
  for (const auto& p : scene.particles)
    if (p.role == ParticleRole::Elastomer && p.volume0 > 0.0) spacing_hint = std::min(spacing_hint, std::cbrt(p.volume0));
  const double layer_tol = 0.25 * (std::isfinite(spacing_hint) ? spacing_hint : scene.grid.dx());

  for (std::size_t p = 0; p < scene.particles.size(); ++p) {
    const auto& part = scene.particles[p];
    if (part.role != ParticleRole::Elastomer || part.x.z() > z_min + layer_tol) continue;
    const KernelStencil st = kernel_weights(part.x, scene.grid, p);
    for (auto node : st.node) scene.grid.set_persistent_condition(node, NodeCondition::Sticky);
  }
}

void sync_indenter(Scene& scene) {
  if (!scene.indenter) return;
  const auto& ind = *scene.indenter;
  const IndenterKinematics kin = ind.driver(scene.step_index);
  for (std::size_t r = 0; r < ind.local.size(); ++r) {
    Particle& p = scene.particles[ind.first + r];
    p.x = kin.pose.apply(ind.local[r]);
    p.v = kin.point_velocity(p.x);
    p.C.setZero();
    p.F.setIdentity();
  }
}

void tag_rigid_nodes(const Scene& scene, SimGrid& grid, const IndenterKinematics& kin) {
  if (!scene.indenter) return;
  const auto& ind = *scene.indenter;
  const double dx = grid.dx();
  const double inv_dx = 1.0 / dx;
  const auto& dims = grid.dims();
  for (std::size_t r = 0; r < ind.local.size(); ++r) {
    const Vec3& x = scene.particles[ind.first + r].x;
    const Vec3 q = (x - grid.origin()) * inv_dx;
    int lo[3], hi[3];
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::max(0, static_cast<int>(std::ceil(q[a] - 1.0)));
      hi[a] = std::min(dims[a] - 1, static_cast<int>(std::floor(q[a] + 1.0)));
    }
    for (int i = lo[0]; i <= hi[0]; ++i)
      for (int j = lo[1]; j <= hi[1]; ++j)
        for (int k = lo[2]; k <= hi[2]; ++k) {
          const Vec3 X = grid.node_position(i, j, k);
          if ((X - x).squaredNorm() > dx * dx) continue;
          const std::size_t idx = grid.index(i, j, k);
          if (grid.persistent_condition(idx) == NodeCondition::Sticky) continue;
          grid.condition[idx] = NodeCondition::RigidVelocity;
          grid.prescribed_velocity[idx] = kin.point_velocity(X);
        }
  }
}

void step(Scene& scene) {
  const std::int64_t k = scene.step_index;
  try {
    std::span<Particle> particles(scene.particles);
    std::optional<IndenterKinematics> kin;
    if (scene.indenter) {
      kin = scene.indenter->driver(k);
      const auto& ind = *scene.indenter;
      for (std::size_t r = 0; r < ind.local.size(); ++r) {
        Particle& p = particles[ind.first + r];
        p.v = kin->point_velocity(p.x);
        p.C.setZero();
      }
    }

    double max_speed = 0.0;
    for (const auto& p : particles) max_speed = std::max(max_speed, p.v.norm());
    if (!(max_speed * scene.config.dt < scene.grid.dx())) {
      throw CflError("CFL violated: dt * max speed = " + format_double(max_speed * scene.config.dt) +
                     " m >= dx = " + format_double(scene.grid.dx()) + " m");
    }

    scene.grid.clear();
    particle_to_grid(particles, scene.grid, scene.config);
    if (kin) tag_rigid_nodes(scene, scene.grid, *kin);
    grid_update(scene.grid, scene.config);
    grid_to_particle(particles, scene.grid, scene.config);
    update_deformation_and_advect(particles, scene.config);
  } catch (const StepError&) {
    throw;
  } catch (const Error& e) {
    throw StepError(k, e.what());
  }
  scene.step_index = k + 1;
  // Snap rigid particles onto the exact prescribed pose to avoid drift from
  // advecting along a rotating velocity field.
  sync_indenter(scene);
}

// ---------------------------------------------------------------------------
// Dump

static_assert(std::endian::native == std::endian::little, "particle dump assumes a little-endian host");

void write_particle_dump(const std::filesystem::path& path, std::span<const Particle> particles) {
  const std::uint64_t count = particles.size();
  std::vector<std::byte> out(sizeof count + particles.size() * 15 * sizeof(double));
  std::byte* w = out.data();
  std::memcpy(w, &count, sizeof count);
  w += sizeof count;
  for (const auto& p : particles) {
    double rec[15];
    for (int a = 0; a < 3; ++a) {
      rec[a] = p.x[a];
      rec[3 + a] = p.v[a];
    }
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) rec[6 + 3 * r + c] = p.F(r, c);
    std::memcpy(w, rec, sizeof rec);
    w += sizeof rec;
  }
  write_file_atomic(path, out);
}

std::vector<ParticleDumpRecord> read_particle_dump(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  std::uint64_t count = 0;
  if (bytes.size() < sizeof count) throw ParseError("particle dump too short", 0);
  std::memcpy(&count, bytes.data(), sizeof count);
  if ((bytes.size() - sizeof count) / (15 * sizeof(double)) < count) {
    throw ParseError("particle dump truncated", bytes.size());
  }
  std::vector<ParticleDumpRecord> out(count);
  const std::byte* r = bytes.data() + sizeof count;
  for (auto& rec : out) {
    double v[15];
    std::memcpy(v, r, sizeof v);
    r += sizeof v;
    rec.x = Vec3(v[0], v[1], v[2]);
    rec.v = Vec3(v[3], v[4], v[5]);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) rec.F(a, b) = v[6 + 3 * a + b];
  }
  return out;
}

}  // namespace tacsim
