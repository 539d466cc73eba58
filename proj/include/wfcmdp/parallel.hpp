#pragma once

#include <optional>

namespace wfcmdp {

/// Worker cap from WFCMDP_THREADS, or nullopt when unset or not a positive
/// integer.
std::optional<int> thread_limit_from_env();

/// Applies WFCMDP_THREADS (default: hardware parallelism) to OpenMP and
/// disables nested parallel regions. Returns the thread count in effect.
int configure_threads();

/// Sets the OpenMP worker count directly; n < 1 restores the default.
void set_thread_count(int n);
int thread_count();

}  // namespace wfcmdp
