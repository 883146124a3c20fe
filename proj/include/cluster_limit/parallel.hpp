#pragma once

#include <cstdint>
#include <exception>
#include <mutex>
#include <utility>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace cluster_limit {

enum class ExecMode { serial, parallel };

/// How a replicate sweep is executed. Results never depend on the choice:
/// every kernel writes per-replicate slots and reduces them in index order,
/// so serial and parallel runs produce identical bytes.
struct ExecPolicy {
    ExecMode mode = ExecMode::parallel;
    int threads = 0;  // 0 = runtime default

    static ExecPolicy serial() { return {ExecMode::serial, 1}; }
    static ExecPolicy parallel(int threads = 0) { return {ExecMode::parallel, threads}; }
};

inline int hardware_threads() {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

/// Runs body(i) for i in [0, count). Parallel mode uses OpenMP; the first
/// exception thrown by any iteration is captured and rethrown on the calling
/// thread after the region finishes.
template <typename Body>
void for_each_index(std::int64_t count, const ExecPolicy& policy, Body&& body) {
    if (count <= 0) return;
#if defined(_OPENMP)
    if (policy.mode == ExecMode::parallel) {
        std::exception_ptr first_error = nullptr;
        std::mutex error_mutex;
        const int threads = policy.threads > 0 ? policy.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
        for (std::int64_t i = 0; i < count; ++i) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
        if (first_error) std::rethrow_exception(first_error);
        return;
    }
#else
    (void)policy;
#endif
    for (std::int64_t i = 0; i < count; ++i) {
        body(i);
    }
}

}  // namespace cluster_limit
