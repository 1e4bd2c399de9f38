#include "tacsim/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>

#ifdef TACSIM_HAVE_OPENMP
#include <omp.h>
#endif

namespace tacsim {

namespace {
int g_threads = 0;
}

int default_thread_count() {
  if (const char* env = std::getenv("TACSIM_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void set_thread_count(int threads) {
  g_threads = threads > 0 ? threads : default_thread_count();
#ifdef TACSIM_HAVE_OPENMP
  omp_set_num_threads(g_threads);
#endif
}

int thread_count() {
#ifdef TACSIM_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace tacsim
