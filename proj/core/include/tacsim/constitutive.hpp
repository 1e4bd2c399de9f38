#pragma once

#include "tacsim/geometry.hpp"

#include <cstddef>

namespace tacsim {

struct LameParameters {
  double mu = 0.0;
  double lambda = 0.0;

  static LameParameters from_youngs(double youngs_modulus, double poisson_ratio);
};

// Rotation factor R of the polar decomposition F = R S (det F > 0).
// Scaled Newton iteration; converges to machine precision.
Mat3 polar_rotation(const Mat3& F);

// Fixed-corotated Kirchhoff stress 2 mu (F - R) F^T + lambda (J - 1) J I.
// Throws InvertedElementError carrying `particle` when det F <= 0.
Mat3 compute_stress(const Mat3& F, const LameParameters& lame, std::size_t particle = 0);

// Strain energy density mu |F - R|^2 + lambda/2 (J - 1)^2, whose derivative
// P = dPsi/dF satisfies P F^T = compute_stress(F).
double elastic_energy_density(const Mat3& F, const LameParameters& lame);

}  // namespace tacsim
