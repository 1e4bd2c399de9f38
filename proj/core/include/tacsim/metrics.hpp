#pragma once

#include "tacsim/geometry.hpp"
#include "tacsim/markers.hpp"
#include "tacsim/scenario.hpp"
#include "tacsim/trajectory.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace tacsim {

struct MarkerObservation {
  MarkerId id;
  Vec2 center = Vec2::Zero();  // px
  Vec2 rect = Vec2::Zero();    // axis-aligned bounding rectangle (w, h) px
};

using ObservationFrame = std::vector<MarkerObservation>;

ObservationFrame observations_from_records(std::span<const MarkerRecord> records);

struct ErrorPair {
  double rmse = 0.0;
  double mag = 0.0;
};

// Displacements are frame_k - frame_0 per id. Throws PairingError when the id
// sets differ, naming the missing ids.
ErrorPair displacement_errors(const ObservationFrame& pred0, const ObservationFrame& pred_k,
                              const ObservationFrame& truth0, const ObservationFrame& truth_k);

ErrorPair shape_errors(const ObservationFrame& pred, const ObservationFrame& truth);

struct MarkerResidual {
  int frame = 0;
  MarkerId id;
  Vec2 displacement = Vec2::Zero();  // d_pred - d_true
  double magnitude = 0.0;            // |d_pred| - |d_true|
  Vec2 rect = Vec2::Zero();          // rect_pred - rect_true
};

struct MetricsReport {
  double e_rmse = 0.0;
  double e_mag = 0.0;
  double shape_e_rmse = 0.0;
  double shape_e_mag = 0.0;
  std::vector<MarkerResidual> residuals;
};

// Pools every marker of frames 1..N-1 (displacements against frame 0) and of
// frames 0..N-1 (shapes). Throws PairingError on length or id mismatch.
MetricsReport compare_sequences(std::span<const ObservationFrame> pred, std::span<const ObservationFrame> truth);

struct LabelledRun {
  std::string name;
  MotionKind motion = MotionKind::Press;
  std::vector<ObservationFrame> pred;
  std::vector<ObservationFrame> truth;
};

struct MotionAggregate {
  std::string label;  // press, slip, rotate, mean
  std::size_t runs = 0;
  double e_rmse = 0.0;
  double e_mag = 0.0;
  double shape_e_rmse = 0.0;
  double shape_e_mag = 0.0;
};

// Per-motion means over runs, followed by a "mean" row averaging the motions
// that have at least one run.
std::vector<MotionAggregate> report(std::span<const LabelledRun> runs);

// CSV with header motion,metric,value.
std::string format_report_csv(std::span<const MotionAggregate> rows);
std::string format_report_summary(std::span<const MotionAggregate> rows);

// Centroid tables of a run directory (frames/frame_NNNN_markers.csv), in frame order.
std::vector<ObservationFrame> read_run_observations(const std::filesystem::path& run_dir);

// Motion recorded in the run manifest; press when absent.
MotionKind read_run_motion(const std::filesystem::path& run_dir);

// A directory with manifest.json is a single run; otherwise each such
// subdirectory is one run, paired between the two trees by name.
std::vector<LabelledRun> pair_run_trees(const std::filesystem::path& pred_dir, const std::filesystem::path& truth_dir);

}  // namespace tacsim
