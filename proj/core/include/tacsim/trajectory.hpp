#pragma once

#include "tacsim/geometry.hpp"
#include "tacsim/mpm.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace tacsim {

enum class MotionKind { Press, Slip, Rotate };

std::string_view to_string(MotionKind kind);
std::optional<MotionKind> motion_kind_from_string(std::string_view text);

// Piecewise-linear indenter schedule. Every motion starts by descending
// `press_depth` along -z at `speed`; after `dwell_steps` of rest a Slip
// translates by `slip_vector` at `speed` and a Rotate turns by
// `rotate_angle` about the vertical axis through the indenter centroid at
// `angular_speed`. The indenter then holds still.
struct Trajectory {
  MotionKind kind = MotionKind::Press;
  double press_depth = 0.001;       // m
  Vec3 slip_vector = Vec3::Zero();  // m, horizontal
  double rotate_angle = 0.0;        // rad, sign gives direction about +z
  double speed = 0.01;              // m/s
  double angular_speed = 0.0;       // rad/s
  std::int64_t dwell_steps = 0;

  void validate() const;
  // Seconds until the schedule is complete (infinite when a needed speed is zero).
  double total_time() const;
};

// Pose of the indenter at `step` (time step * dt) composed after `start`, and
// the right-hand time derivative as linear/angular velocity.
IndenterKinematics trajectory_pose(const Trajectory& traj, std::int64_t step, double dt,
                                   const RigidTransform& start = RigidTransform::identity());

}  // namespace tacsim
