#pragma once

#include "tacsim/scenario.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

namespace tacsim {

struct RunOptions {
  std::filesystem::path out_dir;        // empty: do not write files
  std::optional<int> frames;            // overrides the scenario frame count
  bool deterministic = false;
  std::function<void(const SimulationSetup&, const FrameImages&)> on_frame;
};

struct PhaseTiming {
  double setup_s = 0.0;
  double physics_s = 0.0;
  double imaging_s = 0.0;
  double io_s = 0.0;
};

struct RunSummary {
  int frames = 0;
  bool complete = false;
  std::string error;
  std::size_t particles = 0;
  std::size_t grid_nodes = 0;
  PhaseTiming timing;
  double physics_fps = 0.0;   // steady-state simulation frames per second
  double pipeline_fps = 0.0;  // including imaging and output
  std::string config_hash;
};

// Runs the scenario: frame 0 images the rest state, every following frame
// advances `substeps` engine steps first. Output layout under out_dir:
//   frames/frame_NNNN_{mask.pgm, depth.pgm, joint.ppm, markers.csv}
//   manifest.json
// On an engine error the manifest is written with "complete": false and the
// exception is rethrown.
RunSummary run_scenario(const Scenario& scenario, const RunOptions& options);

std::string manifest_json(const Scenario& scenario, const RunSummary& summary, bool deterministic);

}  // namespace tacsim
