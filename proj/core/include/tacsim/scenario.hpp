#pragma once

#include "tacsim/camera.hpp"
#include "tacsim/geometry.hpp"
#include "tacsim/image.hpp"
#include "tacsim/imaging.hpp"
#include "tacsim/markers.hpp"
#include "tacsim/mpm.hpp"
#include "tacsim/trajectory.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tacsim {

struct ElastomerSpec {
  Vec3 extent{0.02, 0.02, 0.005};  // m; base at z = 0, centred on the z axis
  double spacing = 0.0005;         // m
};

struct IndenterSpec {
  std::filesystem::path mesh;      // resolved path
  double mesh_scale = 0.001;       // mesh units -> m
  double spacing = 0.0005;         // m
  Vec2 offset = Vec2::Zero();      // horizontal offset of the centroid from the elastomer axis (m)
  double gap = 0.0;                // m between mesh bottom and elastomer top
  double yaw = 0.0;                // rad about +z
};

struct ImagingSpec {
  Rgb marker_color{20, 20, 20};
  Colormap colormap = Colormap::Lambertian;
};

struct Scenario {
  std::string name;
  std::filesystem::path source;  // config file the scenario came from
  ElastomerSpec elastomer;
  IndenterSpec indenter;
  TriangleMesh indenter_mesh;    // loaded and scaled to metres
  MarkerLayout markers;
  std::filesystem::path camera_path;
  std::optional<CameraModel> camera;
  SimConfig sim;
  double grid_dx = 0.0;          // 0 = longest elastomer axis / 32
  Trajectory trajectory;
  int frames = 20;
  std::filesystem::path output;
  ImagingSpec imaging;
  std::string config_hash;       // hash over the config and referenced files

  double resolved_grid_dx() const;
};

// Parses the JSON scenario schema. Relative file references resolve against
// `base_dir`. Throws SchemaError / MissingFileError naming the field or path.
Scenario parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

// Everything needed to step and image a scenario.
struct SimulationSetup {
  Scene scene;
  ParticleCloud elastomer;
  std::vector<MarkerGroup> groups;
  std::vector<std::size_t> surface;        // elastomer top-layer particle indices
  std::vector<Vec3> marker_rest;           // rest centroid per group
  std::vector<bool> in_contact;            // per group: rest centroid under the indenter footprint
  Vec3 contact_center = Vec3::Zero();      // indenter axis at the marker plane
};

SimulationSetup build_simulation(const Scenario& scenario);

// One row of the per-frame centroid table.
struct MarkerRecord {
  MarkerId id;
  EllipseFit fit;
};

struct FrameImages {
  int index = 0;
  MaskImage mask;
  GrayImage depth;
  RgbImage joint;
  std::vector<MarkerRecord> markers;
};

FrameImages image_frame(const SimulationSetup& setup, const Scenario& scenario, int index);

std::string format_marker_table(std::span<const MarkerRecord> records);
std::vector<MarkerRecord> parse_marker_table(std::string_view csv_text);

// Image-space motion signatures of the in-contact markers between the rest
// frame and `frame`.
struct MotionSignature {
  std::size_t in_contact = 0;
  double mean_radial_px = 0.0;          // mean outward component w.r.t. the contact center
  Vec2 mean_displacement_px = Vec2::Zero();
  double slip_angle_error_deg = 0.0;    // angle between mean displacement and commanded slip
  double tangential_agreement = 0.0;    // fraction sharing the commanded rotation sign
};

MotionSignature measure_signature(const SimulationSetup& setup, const Scenario& scenario,
                                  std::span<const MarkerRecord> rest, std::span<const MarkerRecord> frame);

// Dataset recipe: every depth x indenter x motion combination.
struct BatchRecipe {
  std::vector<double> press_depths;                // m
  std::vector<std::filesystem::path> indenters;    // STL paths
  std::vector<MotionKind> motions;
};

// 20 depths x {dot_in, pacman, hexagon, cylinder} x {press, slip, rotate},
// indenter files looked up next to the base scenario's mesh.
BatchRecipe default_batch_recipe(const Scenario& base);
std::vector<Scenario> expand_batch(const Scenario& base, const BatchRecipe& recipe);

}  // namespace tacsim
