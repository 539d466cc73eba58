#include "wfcmdp/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace wfcmdp {

std::optional<int> thread_limit_from_env() {
    const char* raw = std::getenv("WFCMDP_THREADS");
    if (!raw || !*raw) return std::nullopt;
    try {
        std::size_t used = 0;
        const int n = std::stoi(raw, &used);
        if (used != std::string(raw).size() || n < 1) return std::nullopt;
        return n;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void set_thread_count(int n) {
    omp_set_max_active_levels(1);
    omp_set_num_threads(n >= 1 ? n : omp_get_num_procs());
}

int thread_count() { return omp_get_max_threads(); }

int configure_threads() {
    set_thread_count(thread_limit_from_env().value_or(0));
    return thread_count();
}

}  // namespace wfcmdp
