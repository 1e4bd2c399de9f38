#pragma once

namespace tacsim {

// Worker threads used by the engine; 0 restores the runtime default.
void set_thread_count(int threads);
int thread_count();

// Default from TACSIM_THREADS, else hardware concurrency.
int default_thread_count();

}  // namespace tacsim
