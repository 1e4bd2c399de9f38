#include "tacsim/imaging.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

namespace {

using namespace tacsim;

std::vector<Vec2> ellipse_points(int n) {
  std::vector<Vec2> pts;
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * i / n;
    const double x = 8.0 * std::cos(t), y = 5.0 * std::sin(t);
    pts.emplace_back(100.0 + 0.8 * x - 0.6 * y, 80.0 + 0.6 * x + 0.8 * y);
  }
  return pts;
}

void BM_FitEllipse(benchmark::State& state) {
  const auto pts = ellipse_points(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_ellipse(pts));
}
BENCHMARK(BM_FitEllipse)->Arg(12)->Arg(32)->Arg(256);

void BM_RasterizeMask(benchmark::State& state) {
  std::vector<EllipseFit> fits;
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c < 9; ++c) fits.push_back(EllipseFit::disc(Vec2(26.0 + 22.0 * c, 26.0 + 22.0 * r), 8.5));
  for (auto _ : state) benchmark::DoNotOptimize(rasterize_mask(fits, 228, 228));
}
BENCHMARK(BM_RasterizeMask);

}  // namespace
BENCHMARK_MAIN();
