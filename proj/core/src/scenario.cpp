#include "tacsim/scenario.hpp"

#include "tacsim/errors.hpp"
#include "tacsim/io.hpp"
#include "tacsim/stl.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace tacsim {

namespace fs = std::filesystem;
using nlohmann::json;

double Scenario::resolved_grid_dx() const {
  return grid_dx > 0.0 ? grid_dx : elastomer.extent.maxCoeff() / 32.0;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Fields {
public:
  Fields(const json& obj, std::string prefix, std::initializer_list<const char*> allowed)
      : obj_(obj), prefix_(std::move(prefix)) {
    if (!obj_.is_object()) throw SchemaError(prefix_.empty() ? "<root>" : prefix_, "must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : obj_.items()) {
      if (!ok.count(item.key())) throw SchemaError(name(item.key().c_str()), "unknown field");
    }
  }

  std::string name(const char* key) const { return prefix_.empty() ? key : prefix_ + "." + key; }
  bool has(const char* key) const { return obj_.contains(key); }

  const json& get(const char* key) const {
    if (!obj_.contains(key)) throw SchemaError(name(key), "missing");
    return obj_.at(key);
  }

  double number(const char* key) const {
    const auto& v = get(key);
    if (!v.is_number()) throw SchemaError(name(key), "must be a number");
    return v.get<double>();
  }
  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::int64_t integer(const char* key) const {
    const auto& v = get(key);
    if (!v.is_number_integer()) throw SchemaError(name(key), "must be an integer");
    return v.get<std::int64_t>();
  }
  std::int64_t integer(const char* key, std::int64_t fallback) const { return has(key) ? integer(key) : fallback; }

  std::string string(const char* key) const {
    const auto& v = get(key);
    if (!v.is_string()) throw SchemaError(name(key), "must be a string");
    return v.get<std::string>();
  }

  template <int N>
  Eigen::Matrix<double, N, 1> vector(const char* key) const {
    const auto& v = get(key);
    if (!v.is_array() || v.size() != N) throw SchemaError(name(key), "must be an array of " + std::to_string(N) + " numbers");
    Eigen::Matrix<double, N, 1> out;
    for (int i = 0; i < N; ++i) {
      if (!v[i].is_number()) throw SchemaError(name(key), "must contain only numbers");
      out[i] = v[i].get<double>();
    }
    return out;
  }

  Fields sub(const char* key, std::initializer_list<const char*> allowed) const {
    return Fields(get(key), name(key), allowed);
  }

private:
  const json& obj_;
  std::string prefix_;
};

fs::path resolve(const fs::path& base_dir, const std::string& ref, const std::string& field) {
  fs::path p(ref);
  if (p.is_relative()) p = base_dir / p;
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) throw MissingFileError(p.string() + " (referenced by " + field + ")");
  return p.lexically_normal();
}

double degrees(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

Scenario parse_scenario(std::string_view json_text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario is not valid JSON: ") + e.what(), e.byte);
  }
  const Fields root(doc, "",
                    {"name", "frames", "output", "elastomer", "indenter", "markers", "camera", "simulation",
                     "trajectory", "imaging"});
  Scenario sc;
  sc.name = root.string("name");
  const auto frames = root.integer("frames");
  if (frames < 1) throw SchemaError("frames", "must be at least 1");
  sc.frames = static_cast<int>(frames);
  sc.output = root.has("output") ? fs::path(root.string("output")) : fs::path("out") / sc.name;

  {
    const auto f = root.sub("elastomer", {"extent", "spacing"});
    sc.elastomer.extent = f.vector<3>("extent");
    sc.elastomer.spacing = f.number("spacing");
    if (!(sc.elastomer.extent.array() > 0.0).all()) throw SchemaError(f.name("extent"), "must be positive");
    if (!(sc.elastomer.spacing > 0.0)) throw SchemaError(f.name("spacing"), "must be positive");
  }
  {
    const auto f = root.sub("indenter", {"mesh", "mesh_scale", "spacing", "offset", "gap", "yaw_deg"});
    sc.indenter.mesh = resolve(base_dir, f.string("mesh"), f.name("mesh"));
    sc.indenter.mesh_scale = f.number("mesh_scale", 1.0);
    sc.indenter.spacing = f.has("spacing") ? f.number("spacing") : sc.elastomer.spacing;
    sc.indenter.offset = f.has("offset") ? Vec2(f.vector<2>("offset")) : Vec2::Zero();
    sc.indenter.gap = f.number("gap", 0.0);
    sc.indenter.yaw = degrees(f.number("yaw_deg", 0.0));
    if (!(sc.indenter.mesh_scale > 0.0)) throw SchemaError(f.name("mesh_scale"), "must be positive");
    if (!(sc.indenter.spacing > 0.0)) throw SchemaError(f.name("spacing"), "must be positive");
    if (!(sc.indenter.gap >= 0.0)) throw SchemaError(f.name("gap"), "must be non-negative");
    sc.indenter_mesh = scaled(read_stl_file(sc.indenter.mesh), sc.indenter.mesh_scale);
    if (sc.indenter_mesh.faces.empty()) throw SchemaError(f.name("mesh"), "mesh has no faces");
  }
  {
    const auto f = root.sub("markers", {"rows", "cols", "pitch", "dot_radius", "depth"});
    sc.markers.rows = static_cast<int>(f.integer("rows"));
    sc.markers.cols = static_cast<int>(f.integer("cols"));
    sc.markers.pitch = f.number("pitch");
    sc.markers.dot_radius = f.number("dot_radius");
    sc.markers.depth = f.number("depth", 0.0);
    try {
      sc.markers.validate();
    } catch (const ArgumentError& e) {
      throw SchemaError("markers", e.what());
    }
  }
  {
    sc.camera_path = resolve(base_dir, root.string("camera"), "camera");
    sc.camera = load_calibration(sc.camera_path);
  }
  {
    const auto f = root.sub("simulation", {"dt", "youngs_modulus", "poisson_ratio", "density", "gravity", "substeps",
                                           "grid_dx"});
    SimConfig d;
    sc.sim.dt = f.number("dt", d.dt);
    sc.sim.youngs_modulus = f.number("youngs_modulus", d.youngs_modulus);
    sc.sim.poisson_ratio = f.number("poisson_ratio", d.poisson_ratio);
    sc.sim.density = f.number("density", d.density);
    sc.sim.gravity = f.has("gravity") ? Vec3(f.vector<3>("gravity")) : d.gravity;
    sc.sim.substeps = static_cast<int>(f.integer("substeps", d.substeps));
    sc.grid_dx = f.number("grid_dx", 0.0);
    try {
      sc.sim.validate();
    } catch (const ArgumentError& e) {
      throw SchemaError("simulation", e.what());
    }
    if (sc.grid_dx < 0.0) throw SchemaError(f.name("grid_dx"), "must be non-negative");
  }
  {
    const auto f = root.sub("trajectory", {"kind", "press_depth", "slip_vector", "rotate_angle_deg", "speed",
                                           "angular_speed", "dwell_steps"});
    const auto kind = motion_kind_from_string(f.string("kind"));
    if (!kind) throw SchemaError(f.name("kind"), "must be one of press, slip, rotate");
    sc.trajectory.kind = *kind;
    sc.trajectory.press_depth = f.number("press_depth");
    sc.trajectory.speed = f.number("speed");
    sc.trajectory.angular_speed = f.number("angular_speed", 0.0);
    sc.trajectory.slip_vector = f.has("slip_vector") ? Vec3(f.vector<3>("slip_vector")) : Vec3::Zero();
    sc.trajectory.rotate_angle = degrees(f.number("rotate_angle_deg", 0.0));
    sc.trajectory.dwell_steps = f.integer("dwell_steps", 0);
    try {
      sc.trajectory.validate();
    } catch (const SchemaError& e) {
      throw SchemaError(f.name(e.field().c_str()), e.what());
    }
  }
  if (root.has("imaging")) {
    const auto f = root.sub("imaging", {"marker_color", "colormap"});
    if (f.has("marker_color")) {
      const auto c = f.vector<3>("marker_color");
      for (int i = 0; i < 3; ++i) {
        if (!(c[i] >= 0.0 && c[i] <= 255.0)) throw SchemaError(f.name("marker_color"), "channels must be in [0, 255]");
        sc.imaging.marker_color[i] = static_cast<std::uint8_t>(c[i]);
      }
    }
    if (f.has("colormap")) {
      const auto name = f.string("colormap");
      if (name == "gray") {
        sc.imaging.colormap = Colormap::Gray;
      } else if (name == "lambertian") {
        sc.imaging.colormap = Colormap::Lambertian;
      } else {
        throw SchemaError(f.name("colormap"), "must be gray or lambertian");
      }
    }
  }

  std::uint64_t h = fnv1a64(doc.dump());
  h = fnv1a64(read_file_bytes(sc.indenter.mesh), h);
  h = fnv1a64(read_file_bytes(sc.camera_path), h);
  sc.config_hash = to_hex(h);
  return sc;
}

Scenario load_scenario(const fs::path& path) {
  const auto text = read_text_file(path);
  Scenario sc = parse_scenario(text, path.parent_path());
  sc.source = path;
  return sc;
}

// ---------------------------------------------------------------------------
// Scene construction

namespace {

// Mesh re-centred so its xy centroid sits on the z axis and its lowest point at z = 0.
TriangleMesh centered_indenter(const TriangleMesh& mesh) {
  const auto box = mesh.bounds();
  TriangleMesh out = mesh;
  const Vec3 shift(-box.center().x(), -box.center().y(), -box.min.z());
  for (auto& v : out.vertices) v += shift;
  return out;
}

}  // namespace

SimulationSetup build_simulation(const Scenario& sc) {
  SimulationSetup setup;
  const double s = sc.elastomer.spacing;
  const double thickness = sc.elastomer.extent.z();
  setup.elastomer = make_box_cloud(sc.elastomer.extent, s, Vec3(0.0, 0.0, 0.5 * thickness));
  setup.groups = assign_markers(setup.elastomer, sc.markers);

  // Indenter particles in local coordinates: origin at the footprint center of the mesh bottom.
  const TriangleMesh local_mesh = centered_indenter(sc.indenter_mesh);
  const ParticleCloud local_cloud = voxel_sample_volume(local_mesh, sc.indenter.spacing);
  if (local_cloud.positions.empty()) throw SchemaError("indenter.spacing", "no indenter particles at this spacing");

  const Vec3 start_pos(sc.indenter.offset.x(), sc.indenter.offset.y(), thickness + sc.indenter.gap);
  const RigidTransform start(rotation_about_z(sc.indenter.yaw), start_pos);
  const Trajectory traj = sc.trajectory;
  const double dt = sc.sim.dt;

  Scene& scene = setup.scene;
  scene.config = sc.sim;
  const double m_e = sc.sim.density * s * s * s;
  scene.particles.reserve(setup.elastomer.size() + local_cloud.size());
  for (const auto& x : setup.elastomer.positions) {
    Particle p;
    p.x = x;
    p.mass = m_e;
    p.volume0 = s * s * s;
    scene.particles.push_back(p);
  }
  for (std::size_t g = 0; g < setup.groups.size(); ++g)
    for (auto idx : setup.groups[g].particle_indices) scene.particles[idx].marker = static_cast<std::int32_t>(g);

  const double si = sc.indenter.spacing;
  RigidIndenter ind;
  ind.first = scene.particles.size();
  ind.local = local_cloud.positions;
  ind.driver = [traj, dt, start](std::int64_t k) { return trajectory_pose(traj, k, dt, start); };
  for (const auto& x : ind.local) {
    Particle p;
    p.x = start.apply(x);
    p.mass = sc.sim.density * si * si * si;
    p.volume0 = si * si * si;
    p.role = ParticleRole::RigidIndenter;
    scene.particles.push_back(p);
  }

  // Grid covers the elastomer and the indenter along its whole schedule.
  BoundingBox box = setup.elastomer.bounds();
  const std::int64_t steps = static_cast<std::int64_t>(sc.frames) * sc.sim.substeps;
  const std::int64_t stride = std::max<std::int64_t>(1, sc.sim.substeps / 4);
  for (std::int64_t k = 0;; k = std::min(k + stride, steps)) {
    const auto kin = trajectory_pose(traj, k, dt, start);
    for (const auto& x : ind.local) box.expand(kin.pose.apply(x));
    if (k == steps) break;
  }
  scene.grid = SimGrid::enclosing(box, sc.resolved_grid_dx());
  scene.indenter = std::move(ind);
  sync_indenter(scene);
  glue_elastomer_base(scene);

  const double top = setup.elastomer.bounds().max.z();
  for (std::size_t i = 0; i < setup.elastomer.size(); ++i)
    if (setup.elastomer.positions[i].z() >= top - 0.25 * s) setup.surface.push_back(i);

  // A marker is in contact when an indenter particle sits above its rest centroid.
  const double reach = 0.75 * sc.indenter.spacing;
  setup.contact_center = Vec3(start_pos.x(), start_pos.y(), top - sc.markers.depth);
  for (const auto& g : setup.groups) {
    std::vector<Vec3> pts;
    for (auto idx : g.particle_indices) pts.push_back(setup.elastomer.positions[idx]);
    const Vec3 c = centroid(pts);
    setup.marker_rest.push_back(c);
    bool covered = false;
    for (std::size_t r = 0; r < scene.indenter->local.size() && !covered; ++r) {
      const Vec3& x = scene.particles[scene.indenter->first + r].x;
      covered = (x.head<2>() - c.head<2>()).norm() <= reach;
    }
    setup.in_contact.push_back(covered);
  }
  return setup;
}

// ---------------------------------------------------------------------------
// Imaging

FrameImages image_frame(const SimulationSetup& setup, const Scenario& sc, int index) {
  const CameraModel& cam = *sc.camera;
  FrameImages out;
  out.index = index;

  const auto groups = extract_groups(setup.scene.particles, setup.groups);
  std::vector<EllipseFit> fits;
  fits.reserve(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto proj = project_points(cam, groups[g]);
    std::vector<Vec2> pts;
    for (const auto& p : proj)
      if (p.pixel.allFinite()) pts.push_back(p.pixel);
    EllipseFit fit;
    if (pts.size() >= 5) {
      fit = fit_ellipse_or_disc(pts);
    } else {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      fit.center = Vec2(nan, nan);
      fit.a = fit.b = nan;
    }
    fits.push_back(fit);
    out.markers.push_back({setup.groups[g].id, fit});
  }
  out.mask = rasterize_mask(fits, cam.width(), cam.height());
  out.depth = render_depth_map(setup.scene.particles, setup.surface, cam);
  out.joint = compose_joint_image(out.depth, out.mask, sc.imaging.marker_color, sc.imaging.colormap);
  return out;
}

std::string format_marker_table(std::span<const MarkerRecord> records) {
  std::string out = "row,col,u,v,a,b,angle\n";
  for (const auto& r : records) {
    out += std::to_string(r.id.row) + "," + std::to_string(r.id.col) + "," + format_double(r.fit.center.x()) + "," +
           format_double(r.fit.center.y()) + "," + format_double(r.fit.a) + "," + format_double(r.fit.b) + "," +
           format_double(r.fit.angle) + "\n";
  }
  return out;
}

std::vector<MarkerRecord> parse_marker_table(std::string_view csv_text) {
  const CsvTable t = parse_csv(csv_text);
  const auto row = t.column("row"), col = t.column("col"), u = t.column("u"), v = t.column("v"), a = t.column("a"),
             b = t.column("b"), angle = t.column("angle");
  std::vector<MarkerRecord> out;
  for (const auto& r : t.rows) {
    if (r.size() != t.header.size()) throw SchemaError("markers.csv", "row has " + std::to_string(r.size()) + " fields");
    MarkerRecord rec;
    rec.id = {static_cast<int>(parse_integer(r[row], "row")), static_cast<int>(parse_integer(r[col], "col"))};
    rec.fit.center = Vec2(parse_double(r[u], "u"), parse_double(r[v], "v"));
    rec.fit.a = parse_double(r[a], "a");
    rec.fit.b = parse_double(r[b], "b");
    rec.fit.angle = parse_double(r[angle], "angle");
    out.push_back(rec);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Signatures

MotionSignature measure_signature(const SimulationSetup& setup, const Scenario& sc, std::span<const MarkerRecord> rest,
                                  std::span<const MarkerRecord> frame) {
  if (rest.size() != setup.groups.size() || frame.size() != setup.groups.size()) {
    throw PairingError("marker tables do not match the scenario's marker groups");
  }
  const CameraModel& cam = *sc.camera;
  auto pixel = [&](const Vec3& x) { return camera_to_pixel(cam, world_to_camera(cam, x)); };
  const Vec2 center_px = pixel(setup.contact_center);

  MotionSignature sig;
  Vec2 sum = Vec2::Zero();
  double radial = 0.0;
  std::size_t agree = 0;
  std::size_t tangential_count = 0;
  const double sign = sc.trajectory.rotate_angle >= 0.0 ? 1.0 : -1.0;
  for (std::size_t g = 0; g < setup.groups.size(); ++g) {
    if (!setup.in_contact[g]) continue;
    ++sig.in_contact;
    const Vec2 d = frame[g].fit.center - rest[g].fit.center;
    sum += d;
    const Vec2 r = rest[g].fit.center - center_px;
    if (r.norm() > 0.0) radial += d.dot(r.normalized());

    // Image direction of a positive rotation about the contact axis at this marker.
    const Vec3 arm = setup.marker_rest[g] - setup.contact_center;
    if (arm.head<2>().norm() < 0.25 * sc.markers.pitch) continue;  // on the axis: no tangential direction
    const Vec3 nudged = setup.marker_rest[g] + 1e-6 * Vec3(-arm.y(), arm.x(), 0.0) / arm.head<2>().norm();
    const Vec2 tangent = pixel(nudged) - pixel(setup.marker_rest[g]);
    ++tangential_count;
    if (sign * d.dot(tangent) > 0.0) ++agree;
  }
  if (sig.in_contact > 0) {
    sig.mean_displacement_px = sum / static_cast<double>(sig.in_contact);
    sig.mean_radial_px = radial / static_cast<double>(sig.in_contact);
  }
  sig.tangential_agreement = tangential_count ? static_cast<double>(agree) / tangential_count : 0.0;

  const Vec3 slip = sc.trajectory.slip_vector;
  if (slip.norm() > 0.0 && sig.mean_displacement_px.norm() > 0.0) {
    const Vec2 expected = pixel(setup.contact_center + slip) - center_px;
    const double cosang = sig.mean_displacement_px.normalized().dot(expected.normalized());
    sig.slip_angle_error_deg = std::acos(std::clamp(cosang, -1.0, 1.0)) * 180.0 / std::numbers::pi;
  }
  return sig;
}

// ---------------------------------------------------------------------------
// Batch

BatchRecipe default_batch_recipe(const Scenario& base) {
  BatchRecipe r;
  for (int i = 0; i < 20; ++i) r.press_depths.push_back(0.0003 + 0.00005 * i);  // 0.30 .. 1.25 mm
  const fs::path dir = base.indenter.mesh.parent_path();
  for (const char* name : {"dot_in", "pacman", "hexagon", "cylinder"}) r.indenters.push_back(dir / (std::string(name) + ".stl"));
  r.motions = {MotionKind::Press, MotionKind::Slip, MotionKind::Rotate};
  return r;
}

std::vector<Scenario> expand_batch(const Scenario& base, const BatchRecipe& recipe) {
  std::vector<Scenario> out;
  out.reserve(recipe.press_depths.size() * recipe.indenters.size() * recipe.motions.size());
  for (const auto& mesh_path : recipe.indenters) {
    const TriangleMesh mesh = scaled(read_stl_file(mesh_path), base.indenter.mesh_scale);
    for (auto motion : recipe.motions) {
      for (std::size_t d = 0; d < recipe.press_depths.size(); ++d) {
        Scenario sc = base;
        sc.indenter.mesh = mesh_path;
        sc.indenter_mesh = mesh;
        sc.trajectory.kind = motion;
        sc.trajectory.press_depth = recipe.press_depths[d];
        if (motion == MotionKind::Slip && sc.trajectory.slip_vector.norm() == 0.0) {
          sc.trajectory.slip_vector = Vec3(0.001, 0.0, 0.0);
        }
        if (motion == MotionKind::Rotate) {
          if (sc.trajectory.rotate_angle == 0.0) sc.trajectory.rotate_angle = degrees(20.0);
          if (sc.trajectory.angular_speed == 0.0) sc.trajectory.angular_speed = 80.0;
        }
        sc.trajectory.validate();
        char depth_tag[16];
        std::snprintf(depth_tag, sizeof depth_tag, "d%02zu", d);
        sc.name = mesh_path.stem().string() + "_" + std::string(to_string(motion)) + "_" + depth_tag;
        sc.output = base.output / sc.name;
        sc.config_hash = to_hex(fnv1a64(base.config_hash + "/" + sc.name));
        out.push_back(std::move(sc));
      }
    }
  }
  return out;
}

}  // namespace tacsim
