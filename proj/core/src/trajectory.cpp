#include "tacsim/trajectory.hpp"

#include "tacsim/errors.hpp"

#include <cmath>
#include <limits>

namespace tacsim {

std::string_view to_string(MotionKind kind) {
  switch (kind) {
    case MotionKind::Press: return "press";
    case MotionKind::Slip: return "slip";
    case MotionKind::Rotate: return "rotate";
  }
  return "press";
}

std::optional<MotionKind> motion_kind_from_string(std::string_view text) {
  if (text == "press") return MotionKind::Press;
  if (text == "slip") return MotionKind::Slip;
  if (text == "rotate") return MotionKind::Rotate;
  return std::nullopt;
}

void Trajectory::validate() const {
  if (!(press_depth > 0.0) || !std::isfinite(press_depth)) throw SchemaError("press_depth", "must be positive");
  if (!(speed >= 0.0) || !std::isfinite(speed)) throw SchemaError("speed", "must be non-negative");
  if (!(angular_speed >= 0.0) || !std::isfinite(angular_speed)) {
    throw SchemaError("angular_speed", "must be non-negative");
  }
  if (dwell_steps < 0) throw SchemaError("dwell_steps", "must be non-negative");
  if (!slip_vector.allFinite() || slip_vector.z() != 0.0) throw SchemaError("slip_vector", "must be horizontal");
  if (kind == MotionKind::Slip && slip_vector.norm() == 0.0) throw SchemaError("slip_vector", "slip needs a non-zero vector");
  if (kind == MotionKind::Rotate && (rotate_angle == 0.0 || !std::isfinite(rotate_angle))) {
    throw SchemaError("rotate_angle", "rotate needs a non-zero angle");
  }
}

double Trajectory::total_time() const {
  const double inf = std::numeric_limits<double>::infinity();
  if (speed <= 0.0) return inf;
  double t = press_depth / speed;
  if (kind == MotionKind::Slip) t += slip_vector.norm() / speed;
  if (kind == MotionKind::Rotate) t += angular_speed > 0.0 ? std::abs(rotate_angle) / angular_speed : inf;
  return t;
}

IndenterKinematics trajectory_pose(const Trajectory& traj, std::int64_t step, double dt, const RigidTransform& start) {
  const double t = static_cast<double>(step) * dt;
  Vec3 disp = Vec3::Zero();
  Vec3 vel = Vec3::Zero();
  double theta = 0.0;
  double omega = 0.0;

  const double press_time = traj.speed > 0.0 ? traj.press_depth / traj.speed : std::numeric_limits<double>::infinity();
  if (t < press_time) {
    disp.z() = -traj.speed * t;
    vel.z() = -traj.speed;
  } else {
    disp.z() = -traj.press_depth;
    const double t2 = t - press_time - static_cast<double>(traj.dwell_steps) * dt;
    if (traj.kind == MotionKind::Slip) {
      const double length = traj.slip_vector.norm();
      const Vec3 dir = traj.slip_vector / length;
      const double slip_time = length / traj.speed;
      if (t2 >= slip_time) {
        disp += traj.slip_vector;
      } else if (t2 >= 0.0) {
        disp += dir * (traj.speed * t2);
        vel = dir * traj.speed;
      }
    } else if (traj.kind == MotionKind::Rotate) {
      const double sign = traj.rotate_angle > 0.0 ? 1.0 : -1.0;
      const double turn_time = traj.angular_speed > 0.0 ? std::abs(traj.rotate_angle) / traj.angular_speed
                                                        : std::numeric_limits<double>::infinity();
      if (t2 >= turn_time) {
        theta = traj.rotate_angle;
      } else if (t2 >= 0.0) {
        theta = sign * traj.angular_speed * t2;
        omega = sign * traj.angular_speed;
      }
    }
  }

  IndenterKinematics kin;
  const Vec3 pivot = start.translation() + disp;
  kin.pose = RigidTransform(rotation_about_z(theta) * start.rotation(), pivot);
  kin.linear_velocity = vel;
  kin.angular_velocity = omega;
  kin.pivot = pivot;
  return kin;
}

}  // namespace tacsim
