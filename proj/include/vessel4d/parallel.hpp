#pragma once

#include <optional>

namespace vessel4d {

/// Caps the OpenMP worker count for every kernel in the library.
void set_thread_limit(int threads);

/// Reads VESSEL4D_THREADS and applies it; returns the value when set and valid.
std::optional<int> apply_thread_limit_from_env();

int thread_limit();

}  // namespace vessel4d
