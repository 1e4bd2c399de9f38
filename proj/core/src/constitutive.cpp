#include "tacsim/constitutive.hpp"

#include "tacsim/errors.hpp"

#include <Eigen/LU>

#include <cmath>

namespace tacsim {

LameParameters LameParameters::from_youngs(double youngs_modulus, double poisson_ratio) {
  LameParameters out;
  out.mu = youngs_modulus / (2.0 * (1.0 + poisson_ratio));
  out.lambda = youngs_modulus * poisson_ratio / ((1.0 + poisson_ratio) * (1.0 - 2.0 * poisson_ratio));
  return out;
}

namespace {

Mat3 cofactor(const Mat3& X) {
  Mat3 c;
  c.col(0) = X.col(1).cross(X.col(2));
  c.col(1) = X.col(2).cross(X.col(0));
  c.col(2) = X.col(0).cross(X.col(1));
  return c;
}

}  // namespace

Mat3 polar_rotation(const Mat3& F) {
  Mat3 X = F;
  bool scaled = true;
  for (int iter = 0; iter < 100; ++iter) {
    // X^-T = cof(X) / det(X)
    const Mat3 cof = cofactor(X);
    const double det = X.col(0).dot(cof.col(0));
    // Determinant scaling speeds up the first iterations of large
    // deformations; it is dropped once close to convergence so the final
    // steps stay quadratically convergent.
    const double gamma = scaled && std::abs(det - 1.0) > 0.1 ? std::cbrt(1.0 / std::abs(det)) : 1.0;
    const Mat3 next = (0.5 * gamma) * X + (0.5 / (gamma * det)) * cof;
    const double change = (next - X).cwiseAbs().maxCoeff();
    X = next;
    if (change < 1e-3) scaled = false;
    // Convergence is quadratic: the remaining error is of order change^2.
    if (change <= 1e-8) break;
  }
  return X;
}

Mat3 compute_stress(const Mat3& F, const LameParameters& lame, std::size_t particle) {
  const double J = F.determinant();
  if (!(J > 0.0)) throw InvertedElementError(particle, J);
  const Mat3 R = polar_rotation(F);
  Mat3 stress = 2.0 * lame.mu * (F - R) * F.transpose();
  stress.diagonal().array() += lame.lambda * (J - 1.0) * J;
  return stress;
}

double elastic_energy_density(const Mat3& F, const LameParameters& lame) {
  const double J = F.determinant();
  if (!(J > 0.0)) throw InvertedElementError(0, J);
  const Mat3 R = polar_rotation(F);
  return lame.mu * (F - R).squaredNorm() + 0.5 * lame.lambda * (J - 1.0) * (J - 1.0);
}

}  // namespace tacsim
