#include "tacsim/runner.hpp"

#include "tacsim/errors.hpp"
#include "tacsim/io.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>

namespace tacsim {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string frame_stem(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04d", index);
  return buf;
}

void write_frame(const fs::path& dir, const FrameImages& f) {
  const fs::path frames = dir / "frames";
  const std::string stem = frame_stem(f.index);
  write_file_atomic(frames / (stem + "_mask.pgm"), encode_pgm(to_gray8(f.mask)));
  write_file_atomic(frames / (stem + "_depth.pgm"), encode_pgm(to_gray8(f.depth)));
  write_file_atomic(frames / (stem + "_joint.ppm"), encode_ppm(f.joint));
  write_file_atomic(frames / (stem + "_markers.csv"), format_marker_table(f.markers));
}

}  // namespace

std::string manifest_json(const Scenario& sc, const RunSummary& s, bool deterministic) {
  nlohmann::json doc;
  doc["scenario"] = sc.name;
  doc["motion"] = std::string(to_string(sc.trajectory.kind));
  doc["config_hash"] = s.config_hash;
  doc["frames"] = s.frames;
  doc["complete"] = s.complete;
  if (!s.error.empty()) doc["error"] = s.error;
  doc["deterministic"] = deterministic;
  doc["particles"] = s.particles;
  doc["grid_nodes"] = s.grid_nodes;
  doc["substeps_per_frame"] = sc.sim.substeps;
  doc["timing_s"] = {{"setup", s.timing.setup_s},
                     {"physics", s.timing.physics_s},
                     {"imaging", s.timing.imaging_s},
                     {"io", s.timing.io_s}};
  doc["physics_fps"] = s.physics_fps;
  doc["pipeline_fps"] = s.pipeline_fps;
  return doc.dump(2) + "\n";
}

RunSummary run_scenario(const Scenario& sc, const RunOptions& options) {
  RunSummary summary;
  summary.config_hash = sc.config_hash;
  const int frames = options.frames.value_or(sc.frames);
  if (frames < 1) throw ArgumentError("frame count must be at least 1");
  const bool write = !options.out_dir.empty();

  auto t0 = Clock::now();
  SimulationSetup setup = build_simulation(sc);
  summary.timing.setup_s = seconds_since(t0);
  summary.particles = setup.scene.particles.size();
  summary.grid_nodes = setup.scene.grid.node_count();

  auto write_manifest = [&] {
    if (write) write_file_atomic(options.out_dir / "manifest.json", manifest_json(sc, summary, options.deterministic));
  };
  write_manifest();

  // Steady state excludes the first simulated frame.
  double steady_physics = 0.0;
  double steady_total = 0.0;
  int steady_frames = 0;
  try {
    for (int f = 0; f < frames; ++f) {
      const auto frame_start = Clock::now();
      if (f > 0) {
        const auto t = Clock::now();
        for (int k = 0; k < sc.sim.substeps; ++k) step(setup.scene);
        const double dt = seconds_since(t);
        summary.timing.physics_s += dt;
        if (f > 1 || frames == 2) {
          steady_physics += dt;
          ++steady_frames;
        }
      }
      auto t = Clock::now();
      const FrameImages images = image_frame(setup, sc, f);
      summary.timing.imaging_s += seconds_since(t);

      t = Clock::now();
      if (write) write_frame(options.out_dir, images);
      if (options.on_frame) options.on_frame(setup, images);
      summary.timing.io_s += seconds_since(t);
      summary.frames = f + 1;
      if (f > 1 || (f == 1 && frames == 2)) steady_total += seconds_since(frame_start);
    }
  } catch (const Error& e) {
    summary.complete = false;
    summary.error = "frame " + std::to_string(summary.frames) + ": " + e.what();
    write_manifest();
    throw;
  }
  summary.complete = true;
  if (steady_frames > 0) {
    summary.physics_fps = steady_frames / steady_physics;
    summary.pipeline_fps = steady_frames / steady_total;
  }
  write_manifest();
  return summary;
}

}  // namespace tacsim
