// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria, except a throughput shortfall on a host below
// the reference core count, which is reported but not counted.

#include "support.hpp"

#include "tacsim/camera.hpp"
#include "tacsim/constitutive.hpp"
#include "tacsim/errors.hpp"
#include "tacsim/imaging.hpp"
#include "tacsim/io.hpp"
#include "tacsim/metrics.hpp"
#include "tacsim/mpm.hpp"
#include "tacsim/parallel.hpp"
#include "tacsim/runner.hpp"
#include "tacsim/scenario.hpp"

#include <Eigen/Geometry>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <vector>

using namespace tacsim;
namespace fs = std::filesystem;

namespace {

// Tolerances and thresholds.
constexpr double kMetricsOracleTol = 1e-12;
constexpr int kMetricsTrials = 1000;
constexpr std::size_t kMetricsMaxMarkers = 1000;
constexpr int kUnityParticles = 10000;
constexpr double kUnityTol = 1e-12;
constexpr double kMassRelTol = 1e-9;
constexpr double kUnityTimeLimitS = 10.0;
constexpr int kMomentumTrials = 100;
constexpr double kMomentumRelTol = 1e-9;
constexpr int kTranslationSteps = 100;
constexpr double kTranslationFTol = 1e-9;
constexpr double kTranslationXTol = 1e-9;
constexpr double kRotationStressTol = 1e-9;
constexpr int kGradientSamples = 20;
constexpr double kGradientMinDet = 0.5;
constexpr double kGradientStep = 1e-6;
constexpr double kGradientRelTol = 1e-4;
constexpr double kProjectionTol = 1e-9;
constexpr int kEllipseTrials = 100;
constexpr int kEllipsePoints = 32;
constexpr double kEllipseTol = 1e-6;
constexpr double kSlipAngleTolDeg = 10.0;
constexpr double kRotateAgreement = 0.9;
constexpr double kSignatureTimeLimitS = 60.0;
constexpr double kThroughputTargetFps = 5.0;
constexpr int kThroughputFrames = 5;
constexpr unsigned kThroughputReferenceCores = 8;

struct Outcome {
  bool pass = false;
  std::string detail;
  bool counted = true;  // whether a failure contributes to the exit status
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path scenario_path(const std::string& name) { return fs::path(TACSIM_SCENARIO_DIR) / (name + ".json"); }

// ---------------------------------------------------------------------------

double bspline(double r) {
  r = std::abs(r);
  if (r < 0.5) return 0.75 - r * r;
  if (r < 1.5) return 0.5 * (1.5 - r) * (1.5 - r);
  return 0.0;
}

Outcome ac1_metrics() {
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<std::size_t> count(1, kMetricsMaxMarkers);
  std::uniform_real_distribution<double> pos(0.0, 228.0), disp(-5.0, 5.0);
  double worst = 0.0;
  for (int t = 0; t < kMetricsTrials; ++t) {
    const std::size_t n = count(rng);
    ObservationFrame p0, pk, t0, tk;
    for (std::size_t i = 0; i < n; ++i) {
      const MarkerId id{static_cast<int>(i / 32), static_cast<int>(i % 32)};
      const Vec2 c(pos(rng), pos(rng));
      p0.push_back({id, c, Vec2::Zero()});
      t0.push_back({id, c + Vec2(disp(rng), disp(rng)), Vec2::Zero()});
      pk.push_back({id, p0.back().center + Vec2(disp(rng), disp(rng)), Vec2::Zero()});
      tk.push_back({id, t0.back().center + Vec2(disp(rng), disp(rng)), Vec2::Zero()});
    }
    // Straight-loop oracle.
    double sq = 0.0, mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ax = pk[i].center.x() - p0[i].center.x(), ay = pk[i].center.y() - p0[i].center.y();
      const double bx = tk[i].center.x() - t0[i].center.x(), by = tk[i].center.y() - t0[i].center.y();
      sq += (ax - bx) * (ax - bx) + (ay - by) * (ay - by);
      mag += std::abs(std::sqrt(ax * ax + ay * ay) - std::sqrt(bx * bx + by * by));
    }
    const double rmse = std::sqrt(sq / n), emag = mag / n;
    const auto e = displacement_errors(p0, pk, t0, tk);
    worst = std::max({worst, std::abs(e.rmse - rmse) / std::max(1.0, rmse), std::abs(e.mag - emag) / std::max(1.0, emag)});
  }
  const ObservationFrame zero{{{0, 0}, Vec2(0, 0), Vec2::Zero()}};
  const ObservationFrame moved{{{0, 0}, Vec2(3, 4), Vec2::Zero()}};
  const auto hand = displacement_errors(zero, moved, zero, zero);
  const bool hand_ok = hand.rmse == 5.0 && hand.mag == 5.0;
  return {worst <= kMetricsOracleTol && hand_ok,
          fmt("max oracle deviation %.2e over %d sets; (3,4) case -> e_rmse %.17g, e_mag %.17g", worst,
              kMetricsTrials, hand.rmse, hand.mag)};
}

Outcome ac2_unity_and_mass() {
  const auto t0 = Clock::now();
  SimGrid grid({40, 40, 40}, 0.01, Vec3::Zero());
  std::mt19937_64 rng(2002);
  std::uniform_real_distribution<double> u(0.016, 0.374), m(1e-4, 1e-3);
  std::vector<Particle> ps(kUnityParticles);
  double worst_sum = 0.0, total = 0.0;
  for (auto& p : ps) {
    p.x = Vec3(u(rng), u(rng), u(rng));
    p.mass = m(rng);
    p.volume0 = 1e-6;
    total += p.mass;
    const KernelStencil st = kernel_weights(p.x, grid);
    double s = 0.0;
    for (double w : st.weight) s += w;
    worst_sum = std::max(worst_sum, std::abs(s - 1.0));
  }
  particle_to_grid(ps, grid, SimConfig{});
  double grid_mass = 0.0;
  for (double g : grid.mass) grid_mass += g;
  const double rel = std::abs(grid_mass - total) / total;
  const double elapsed = seconds_since(t0);
  return {worst_sum <= kUnityTol && rel <= kMassRelTol && elapsed < kUnityTimeLimitS,
          fmt("max |sum w - 1| %.2e, grid mass rel. error %.2e, %.2f s", worst_sum, rel, elapsed)};
}

Outcome ac3_momentum() {
  std::mt19937_64 rng(3003);
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.03, 0.27), m(1e-4, 1e-3);
  std::uniform_int_distribution<int> count(1, 2000);
  SimConfig cfg;
  cfg.elasticity = false;
  double worst = 0.0;
  for (int t = 0; t < kMomentumTrials; ++t) {
    SimGrid grid({32, 32, 32}, 0.01, Vec3::Zero());
    const Vec3 drift(u(rng), u(rng), u(rng));
    std::vector<Particle> ps(static_cast<std::size_t>(count(rng)));
    Vec3 expected = Vec3::Zero();
    for (auto& p : ps) {
      p.x = Vec3(pos(rng), pos(rng), pos(rng));
      p.v = drift + 0.5 * Vec3(u(rng), u(rng), u(rng));
      for (int i = 0; i < 9; ++i) p.C(i / 3, i % 3) = 20.0 * u(rng);
      p.F = Mat3::Identity() + 0.1 * Mat3::Random();
      p.mass = m(rng);
      p.volume0 = 1e-6;
      expected += p.mass * p.v;
    }
    particle_to_grid(ps, grid, cfg);
    Vec3 got = Vec3::Zero();
    for (const auto& g : grid.momentum) got += g;
    worst = std::max(worst, (got - expected).norm() / expected.norm());
  }
  return {worst <= kMomentumRelTol, fmt("max relative momentum error %.2e over %d scenes", worst, kMomentumTrials)};
}

Outcome ac4_translation() {
  Scene s;
  const Vec3 v(0.25, -0.15, 0.1);
  const auto cloud = make_box_cloud(Vec3(0.02, 0.02, 0.005), 0.0005, Vec3(0.02, 0.02, 0.01));
  for (const auto& x : cloud.positions) {
    Particle p;
    p.x = x;
    p.v = v;
    p.mass = 1070.0 * 1.25e-10;
    p.volume0 = 1.25e-10;
    s.particles.push_back(p);
  }
  s.grid = SimGrid({66, 66, 34}, 0.000625, Vec3::Zero());
  s.config.dt = 5e-6;
  const auto start = s.particles;
  for (int k = 0; k < kTranslationSteps; ++k) step(s);
  double f_err = 0.0, x_err = 0.0;
  for (std::size_t p = 0; p < start.size(); ++p) {
    f_err = std::max(f_err, (s.particles[p].F - Mat3::Identity()).cwiseAbs().maxCoeff());
    x_err = std::max(x_err, (s.particles[p].x - (start[p].x + kTranslationSteps * s.config.dt * v)).norm());
  }
  return {f_err < kTranslationFTol && x_err < kTranslationXTol,
          fmt("%zu particles, %d steps: max |F - I| %.2e, max position error %.2e m", start.size(),
              kTranslationSteps, f_err, x_err)};
}

Outcome ac5_constitutive() {
  const auto lame = LameParameters::from_youngs(1.45e5, 0.45);
  const bool rest = compute_stress(Mat3::Identity(), lame) == Mat3::Zero();
  std::mt19937_64 rng(5005);
  std::normal_distribution<double> n;
  double rot = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Mat3 R = Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized().toRotationMatrix();
    rot = std::max(rot, compute_stress(R, lame).cwiseAbs().maxCoeff());
  }
  const auto soft = LameParameters::from_youngs(3.0, 0.3);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  double worst = 0.0;
  for (int t = 0; t < kGradientSamples;) {
    Mat3 F = Mat3::Identity();
    for (int i = 0; i < 9; ++i) F(i / 3, i % 3) += u(rng);
    if (!(F.determinant() > kGradientMinDet)) continue;
    ++t;
    Mat3 P;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Mat3 Fp = F, Fm = F;
        Fp(i, j) += kGradientStep;
        Fm(i, j) -= kGradientStep;
        P(i, j) = (elastic_energy_density(Fp, soft) - elastic_energy_density(Fm, soft)) / (2.0 * kGradientStep);
      }
    const Mat3 tau = compute_stress(F, soft);
    worst = std::max(worst, (P * F.transpose() - tau).norm() / tau.norm());
  }
  return {rest && rot <= kRotationStressTol && worst < kGradientRelTol,
          fmt("stress(I) exactly zero: %s; max |stress(R)| %.2e; max FD gradient rel. error %.2e", rest ? "yes" : "no",
              rot, worst)};
}

Outcome ac6_projection() {
  const CameraModel cam(Mat3::Identity(), Vec3::Zero(), 200.0, 200.0, 114.0, 114.0, 228, 228);
  std::mt19937_64 rng(6006);
  std::uniform_real_distribution<double> u(-0.1, 0.1), z(0.01, 0.5), s(0.01, 100.0);
  double worst = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const Vec3 x(u(rng), u(rng), z(rng));
    worst = std::max(worst, (camera_to_pixel(cam, x) - camera_to_pixel(cam, s(rng) * x)).norm());
  }
  const Vec2 hand = camera_to_pixel(cam, Vec3(0.01, -0.02, 0.05));
  const double hand_err = std::max(std::abs(hand.x() - 154.0), std::abs(hand.y() - 34.0));
  return {worst <= kProjectionTol && hand_err <= kProjectionTol,
          fmt("max scale-invariance deviation %.2e px; hand case u = %.12g, v = %.12g", worst, hand.x(), hand.y())};
}

Outcome ac7_ellipse() {
  std::mt19937_64 rng(7007);
  std::uniform_real_distribution<double> c(20.0, 200.0), ax(2.0, 20.0), ang(0.0, std::numbers::pi);
  double center_err = 0.0, axis_err = 0.0;
  for (int t = 0; t < kEllipseTrials; ++t) {
    const Vec2 center(c(rng), c(rng));
    double a = ax(rng), b = ax(rng);
    if (a < b) std::swap(a, b);
    const double th = ang(rng);
    std::vector<Vec2> pts;
    for (int i = 0; i < kEllipsePoints; ++i) {
      const double s = 2.0 * std::numbers::pi * i / kEllipsePoints;
      const Vec2 local(a * std::cos(s), b * std::sin(s));
      pts.push_back(center + Eigen::Rotation2Dd(th) * local);
    }
    const EllipseFit fit = fit_ellipse(pts);
    center_err = std::max(center_err, (fit.center - center).norm());
    axis_err = std::max({axis_err, std::abs(fit.a - a), std::abs(fit.b - b)});
  }
  return {center_err < kEllipseTol && axis_err < kEllipseTol,
          fmt("%d trials: max center error %.2e px, max axis error %.2e px", kEllipseTrials, center_err, axis_err)};
}

// Runs a scenario to completion, collecting frames through the callback.
struct CollectedRun {
  RunSummary summary;
  std::vector<int> components;
  std::vector<std::vector<MarkerRecord>> tables;
  MotionSignature signature;
  double seconds = 0.0;
};

CollectedRun collect(const Scenario& sc, const fs::path& out, bool want_signature) {
  CollectedRun run;
  RunOptions opts;
  opts.out_dir = out;
  opts.deterministic = true;
  opts.on_frame = [&](const SimulationSetup& setup, const FrameImages& f) {
    run.components.push_back(test::count_components(f.mask));
    run.tables.push_back(f.markers);
    if (want_signature && f.index == sc.frames - 1) {
      run.signature = measure_signature(setup, sc, run.tables.front(), f.markers);
    }
  };
  const auto t0 = Clock::now();
  run.summary = run_scenario(sc, opts);
  run.seconds = seconds_since(t0);
  return run;
}

std::string hash_tree(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::uint64_t h = fnv1a64(std::string_view(""));
  for (const auto& f : files) {
    const std::string rel = fs::relative(f, root).generic_string();
    h = fnv1a64(std::as_bytes(std::span(rel.data(), rel.size())), h);
    h = fnv1a64(read_file_bytes(f), h);
  }
  return to_hex(h) + " (" + std::to_string(files.size()) + " files)";
}

Outcome ac8_components(const CollectedRun& nine_by_nine, const CollectedRun& nine_by_seven) {
  auto all_equal = [](const std::vector<int>& v, int n) {
    return !v.empty() && std::all_of(v.begin(), v.end(), [n](int c) { return c == n; });
  };
  auto range = [](const std::vector<int>& v) {
    return fmt("%d..%d", *std::min_element(v.begin(), v.end()), *std::max_element(v.begin(), v.end()));
  };
  return {all_equal(nine_by_nine.components, 81) && all_equal(nine_by_seven.components, 63),
          fmt("9x9: %zu frames with %s components; 9x7: %zu frames with %s components",
              nine_by_nine.components.size(), range(nine_by_nine.components).c_str(), nine_by_seven.components.size(),
              range(nine_by_seven.components).c_str())};
}

Outcome ac9_signatures(const CollectedRun& press, const CollectedRun& slip, const CollectedRun& rotate) {
  const bool ok = press.signature.in_contact > 0 && press.signature.mean_radial_px > 0.0 &&
                  slip.signature.in_contact > 0 && slip.signature.slip_angle_error_deg <= kSlipAngleTolDeg &&
                  rotate.signature.in_contact > 0 && rotate.signature.tangential_agreement >= kRotateAgreement &&
                  press.seconds <= kSignatureTimeLimitS && slip.seconds <= kSignatureTimeLimitS &&
                  rotate.seconds <= kSignatureTimeLimitS;
  return {ok, fmt("press: radial %+.3f px (%zu markers, %.1f s); slip: direction error %.2f deg (%.1f s); "
                  "rotate: %.0f%% agree (%.1f s)",
                  press.signature.mean_radial_px, press.signature.in_contact, press.seconds,
                  slip.signature.slip_angle_error_deg, slip.seconds, 100.0 * rotate.signature.tangential_agreement,
                  rotate.seconds)};
}

Outcome ac10_throughput(const fs::path& scratch) {
  Scenario sc = load_scenario(scenario_path("press_dotin"));
  sc.name = "throughput_48k";
  sc.elastomer.extent = Vec3(0.0305, 0.0305, 0.0065);
  sc.frames = kThroughputFrames;
  RunOptions opts;
  opts.out_dir = scratch / "throughput";
  const RunSummary s = run_scenario(sc, opts);
  const unsigned cores = std::thread::hardware_concurrency();
  Outcome o{s.physics_fps >= kThroughputTargetFps,
            fmt("%zu particles, %zu grid nodes, %d substeps/frame: %.2f simulation frames/s "
                "(%d threads, %u hardware threads; target %.1f with %u cores)",
                s.particles, s.grid_nodes, sc.sim.substeps, s.physics_fps, thread_count(), cores,
                kThroughputTargetFps, kThroughputReferenceCores)};
  // The target is defined for the reference machine; below it the measurement
  // is still reported but cannot decide the exit status.
  if (!o.pass && cores < kThroughputReferenceCores) {
    o.counted = false;
    o.detail += "; host below the reference core count, not counted in the exit status";
  }
  return o;
}

}  // namespace

int main() {
  set_thread_count(0);
  const fs::path scratch = test::scratch_dir("acceptance");
  int failures = 0;
  int counted_failures = 0;
  auto report = [&](int id, const char* title, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    counted_failures += !o.pass && o.counted;
    std::printf("[%s] AC%-2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "metrics oracle", ac1_metrics);
  report(2, "partition of unity and mass", ac2_unity_and_mass);
  report(3, "momentum conservation", ac3_momentum);
  report(4, "rigid-motion neutrality", ac4_translation);
  report(5, "constitutive sanity", ac5_constitutive);
  report(6, "projection", ac6_projection);
  report(7, "ellipse fitting", ac7_ellipse);

  CollectedRun press_a, press_b, mini, slip, rotate;
  std::string setup_error;
  try {
    press_a = collect(load_scenario(scenario_path("press_dotin")), scratch / "press_a", true);
    press_b = collect(load_scenario(scenario_path("press_dotin")), scratch / "press_b", false);
    mini = collect(load_scenario(scenario_path("press_gelsight_mini")), scratch / "mini", false);
    slip = collect(load_scenario(scenario_path("slip_dotin")), scratch / "slip", true);
    rotate = collect(load_scenario(scenario_path("rotate_dotin")), scratch / "rotate", true);
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  auto guarded = [&](std::function<Outcome()> f) {
    return [&setup_error, f] { return setup_error.empty() ? f() : Outcome{false, "scenario run failed: " + setup_error}; };
  };
  report(8, "marker mask components", guarded([&] { return ac8_components(press_a, mini); }));
  report(9, "motion signatures", guarded([&] { return ac9_signatures(press_a, slip, rotate); }));
  report(10, "throughput", [&] { return ac10_throughput(scratch); });
  report(11, "determinism", guarded([&] {
           const std::string a = hash_tree(scratch / "press_a"), b = hash_tree(scratch / "press_b");
           return Outcome{a == b, "run 1 " + a + ", run 2 " + b};
         }));

  std::printf("%d of 11 criteria failed (%d counted)\n", failures, counted_failures);
  return counted_failures;
}
