#include "vessel4d/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

#include <omp.h>

namespace vessel4d {

void set_thread_limit(int threads) {
  omp_set_num_threads(threads > 0 ? threads : 1);
}

std::optional<int> apply_thread_limit_from_env() {
  const char* raw = std::getenv("VESSEL4D_THREADS");
  if (raw == nullptr) return std::nullopt;
  int value = 0;
  const char* end = raw + std::strlen(raw);
  auto [ptr, ec] = std::from_chars(raw, end, value);
  if (ec != std::errc() || ptr != end || value < 1) return std::nullopt;
  set_thread_limit(value);
  return value;
}

int thread_limit() { return omp_get_max_threads(); }

}  // namespace vessel4d
