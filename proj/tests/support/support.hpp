#pragma once

#include "tacsim/fixtures.hpp"
#include "tacsim/image.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace tacsim::test {

// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tacsim_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Bundled fixtures materialised in a scratch directory.
inline std::filesystem::path fixture_dir() {
  static const std::filesystem::path dir = [] {
    auto d = scratch_dir("fixtures");
    write_fixtures(d);
    return d;
  }();
  return dir;
}

// 4-connected components of set pixels, by breadth-first flood fill.
inline int count_components(const MaskImage& mask) {
  std::vector<std::uint8_t> seen(mask.size(), 0);
  int components = 0;
  std::vector<std::pair<int, int>> queue;
  for (int v = 0; v < mask.height; ++v) {
    for (int u = 0; u < mask.width; ++u) {
      const std::size_t idx = static_cast<std::size_t>(v) * mask.width + u;
      if (!mask.data[idx] || seen[idx]) continue;
      ++components;
      queue.assign(1, {u, v});
      seen[idx] = 1;
      for (std::size_t q = 0; q < queue.size(); ++q) {
        const auto [cu, cv] = queue[q];
        const int du[4] = {1, -1, 0, 0};
        const int dv[4] = {0, 0, 1, -1};
        for (int n = 0; n < 4; ++n) {
          const int nu = cu + du[n], nv = cv + dv[n];
          if (nu < 0 || nv < 0 || nu >= mask.width || nv >= mask.height) continue;
          const std::size_t nidx = static_cast<std::size_t>(nv) * mask.width + nu;
          if (mask.data[nidx] && !seen[nidx]) {
            seen[nidx] = 1;
            queue.emplace_back(nu, nv);
          }
        }
      }
    }
  }
  return components;
}

}  // namespace tacsim::test
