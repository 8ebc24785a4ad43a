#include "ergotorus/parallel.hpp"

#include <cstdlib>
#include <string>

namespace ergotorus {

namespace {

std::atomic<unsigned> g_threads{0};

}  // namespace

void set_thread_count(unsigned n) noexcept { g_threads = n; }

unsigned thread_count() noexcept {
  unsigned n = g_threads;
  if (n != 0) return n;
  if (const char* env = std::getenv("ERGOTORUS_THREADS")) {
    try {
      long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return 1;
}

}  // namespace ergotorus
