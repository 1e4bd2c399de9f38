#include "tacsim/constitutive.hpp"
#include "tacsim/errors.hpp"

#include <doctest.h>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <random>

using namespace tacsim;

namespace {

// Rotation factor through the SVD F = U S V^T, R = U V^T.
Mat3 svd_rotation(const Mat3& F) {
  Eigen::JacobiSVD<Mat3> svd(F, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 U = svd.matrixU();
  Mat3 V = svd.matrixV();
  if (U.determinant() < 0.0) U.col(2) *= -1.0;
  if (V.determinant() < 0.0) V.col(2) *= -1.0;
  return U * V.transpose();
}

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized().toRotationMatrix();
}

Mat3 random_f(std::mt19937_64& rng, double spread, double min_det) {
  std::uniform_real_distribution<double> u(-spread, spread);
  for (;;) {
    Mat3 F = Mat3::Identity();
    for (int i = 0; i < 9; ++i) F(i / 3, i % 3) += u(rng);
    if (F.determinant() > min_det) return F;
  }
}

}  // namespace

TEST_CASE("Lame parameters") {
  const auto l = LameParameters::from_youngs(1.0, 0.0);
  CHECK(l.mu == 0.5);
  CHECK(l.lambda == 0.0);
  const auto s = LameParameters::from_youngs(1.45e5, 0.45);
  CHECK(s.mu == doctest::Approx(1.45e5 / 2.9));
  CHECK(s.lambda == doctest::Approx(1.45e5 * 0.45 / (1.45 * 0.1)));
}

TEST_CASE("polar rotation agrees with the SVD") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const Mat3 F = random_rotation(rng) * random_f(rng, 0.6, 0.05);
    CHECK((polar_rotation(F) - svd_rotation(F)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("stress vanishes at rest and under rotation") {
  const auto lame = LameParameters::from_youngs(1.45e5, 0.45);
  CHECK(compute_stress(Mat3::Identity(), lame) == Mat3::Zero());
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    CHECK(compute_stress(random_rotation(rng), lame).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("stretch along x with nu = 0") {
  const auto lame = LameParameters::from_youngs(1.0, 0.0);
  const Mat3 F = Eigen::Vector3d(1.1, 1.0, 1.0).asDiagonal();
  // Independent evaluation: R from the SVD, then 2 mu (F - R) F^T + lambda (J - 1) J I.
  const Mat3 R = svd_rotation(F);
  const double J = F.determinant();
  const Mat3 expected = 2.0 * lame.mu * (F - R) * F.transpose() + lame.lambda * (J - 1.0) * J * Mat3::Identity();
  const Mat3 got = compute_stress(F, lame);
  CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(got(0, 0) == doctest::Approx(0.11).epsilon(1e-12));
}

TEST_CASE("stress is the Kirchhoff form of the energy gradient") {
  const auto lame = LameParameters::from_youngs(2.0, 0.3);
  std::mt19937_64 rng(5);
  const double h = 1e-6;
  for (int t = 0; t < 20; ++t) {
    const Mat3 F = random_f(rng, 0.3, 0.5);
    Mat3 P;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Mat3 Fp = F, Fm = F;
        Fp(i, j) += h;
        Fm(i, j) -= h;
        P(i, j) = (elastic_energy_density(Fp, lame) - elastic_energy_density(Fm, lame)) / (2.0 * h);
      }
    const Mat3 tau = compute_stress(F, lame);
    CHECK((P * F.transpose() - tau).norm() / tau.norm() < 1e-4);
  }
}

TEST_CASE("inverted elements are rejected") {
  const auto lame = LameParameters::from_youngs(1.0, 0.3);
  Mat3 F = Mat3::Identity();
  F(2, 2) = -1.0;
  try {
    compute_stress(F, lame, 42);
    FAIL("expected InvertedElementError");
  } catch (const InvertedElementError& e) {
    CHECK(e.particle() == 42);
  }
}
