#include "tacsim/errors.hpp"
#include "tacsim/imaging.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <numbers>

namespace tacsim {

Vec2 EllipseFit::bounding_rect() const {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {2.0 * std::sqrt(a * a * c * c + b * b * s * s), 2.0 * std::sqrt(a * a * s * s + b * b * c * c)};
}

bool EllipseFit::contains(double u, double v) const {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double du = u - center.x();
  const double dv = v - center.y();
  const double x = (du * c + dv * s) / a;
  const double y = (dv * c - du * s) / b;
  return x * x + y * y <= 1.0;
}

EllipseFit EllipseFit::disc(const Vec2& center, double radius) {
  EllipseFit e;
  e.center = center;
  e.a = radius;
  e.b = radius;
  e.angle = 0.0;
  return e;
}

namespace {

using Mat3d = Eigen::Matrix3d;
using Vec3d = Eigen::Vector3d;
using Vec6d = Eigen::Matrix<double, 6, 1>;

double wrap_angle(double angle) {
  angle = std::fmod(angle, std::numbers::pi);
  if (angle < 0.0) angle += std::numbers::pi;
  if (angle >= std::numbers::pi) angle -= std::numbers::pi;
  return angle;
}

}  // namespace

EllipseFit fit_ellipse(std::span<const Vec2> points) {
  const std::size_t n = points.size();
  if (n < 5) throw InsufficientPointsError("ellipse fit needs at least 5 points, got " + std::to_string(n));
  for (const auto& p : points) {
    if (!p.allFinite()) throw DegenerateFitError("non-finite point in ellipse fit");
  }

  Vec2 mean = Vec2::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(n);
  double spread = 0.0;
  for (const auto& p : points) spread += (p - mean).squaredNorm();
  spread = std::sqrt(spread / static_cast<double>(n));
  if (!(spread > 0.0)) throw DegenerateFitError("all points coincide");

  // Scatter matrices of the quadratic (x^2, xy, y^2) and linear (x, y, 1) parts.
  Mat3d S1 = Mat3d::Zero(), S2 = Mat3d::Zero(), S3 = Mat3d::Zero();
  for (const auto& p : points) {
    const double x = (p.x() - mean.x()) / spread;
    const double y = (p.y() - mean.y()) / spread;
    const Vec3d d1(x * x, x * y, y * y);
    const Vec3d d2(x, y, 1.0);
    S1 += d1 * d1.transpose();
    S2 += d1 * d2.transpose();
    S3 += d2 * d2.transpose();
  }

  // Collinear input makes the linear block rank deficient.
  Eigen::SelfAdjointEigenSolver<Mat3d> s3_eig(S3);
  if (s3_eig.eigenvalues()(0) <= 1e-10 * s3_eig.eigenvalues()(2)) {
    throw DegenerateFitError("points are collinear");
  }
  const Mat3d T = -S3.inverse() * S2.transpose();
  const Mat3d M = S1 + S2 * T;
  Mat3d Mc;
  Mc.row(0) = M.row(2) / 2.0;
  Mc.row(1) = -M.row(1);
  Mc.row(2) = M.row(0) / 2.0;

  Eigen::EigenSolver<Mat3d> eig(Mc);
  const auto vectors = eig.eigenvectors();
  Vec3d best = Vec3d::Zero();
  double best_residual = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const Vec3d v = vectors.col(i).real();
    const double constraint = 4.0 * v(0) * v(2) - v(1) * v(1);
    if (!(constraint > 0.0)) continue;
    const Vec3d q = v / std::sqrt(constraint);
    const double residual = q.dot(M * q);
    if (std::abs(residual) < best_residual) {
      best_residual = std::abs(residual);
      best = q;
    }
  }
  if (!std::isfinite(best_residual)) throw DegenerateFitError("no elliptic solution");
  const Vec3d lin = T * best;

  const double A = best(0), B = best(1), C = best(2), D = lin(0), E = lin(1), F = lin(2);
  Eigen::Matrix2d H;
  H << 2.0 * A, B, B, 2.0 * C;
  const double det = H.determinant();
  if (!(std::abs(det) > 0.0)) throw DegenerateFitError("conic has no center");
  const Vec2 c = H.inverse() * Vec2(-D, -E);
  double f0 = F + 0.5 * (D * c.x() + E * c.y());

  Eigen::Matrix2d Q;
  Q << A, 0.5 * B, 0.5 * B, C;
  if (f0 > 0.0) {
    Q = -Q;
    f0 = -f0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> qe(Q);
  const double l0 = qe.eigenvalues()(0);
  const double l1 = qe.eigenvalues()(1);
  if (!(l0 > 0.0 && l1 > 0.0 && f0 < 0.0)) throw DegenerateFitError("conic is not a real ellipse");

  EllipseFit out;
  out.center = mean + spread * c;
  out.a = spread * std::sqrt(-f0 / l0);
  out.b = spread * std::sqrt(-f0 / l1);
  const Vec2 major = qe.eigenvectors().col(0);
  out.angle = wrap_angle(std::atan2(major.y(), major.x()));
  if (!(out.a >= out.b && out.b > 0.0) || !out.center.allFinite() || !std::isfinite(out.a)) {
    throw DegenerateFitError("ellipse parameters are not finite");
  }
  return out;
}

EllipseFit fit_ellipse_or_disc(std::span<const Vec2> points) {
  try {
    return fit_ellipse(points);
  } catch (const DegenerateFitError&) {
    Vec2 mean = Vec2::Zero();
    for (const auto& p : points) mean += p;
    mean /= static_cast<double>(points.size());
    double ms = 0.0;
    for (const auto& p : points) ms += (p - mean).squaredNorm();
    const double rms = std::sqrt(ms / static_cast<double>(points.size()));
    return EllipseFit::disc(mean, std::max(rms, 0.5));
  }
}

}  // namespace tacsim
