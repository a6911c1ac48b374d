#pragma once

#include <atomic>
#include <cstddef>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tsc {

// Runtime switch for the OpenMP kernels. Every parallel kernel has a
// serial reference twin; parallel and serial paths must produce identical
// results because all per-item randomness comes from derived streams.
namespace parallel {

inline std::atomic<int>& thread_setting() {
    static std::atomic<int> n = [] {
        if (const char* env = std::getenv("TSC_THREADS")) {
            int v = std::atoi(env);
            if (v >= 1) return v;
        }
#ifdef _OPENMP
        return omp_get_max_threads();
#else
        return 1;
#endif
    }();
    return n;
}

inline int max_threads() { return thread_setting().load(); }
inline void set_max_threads(int n) { thread_setting().store(n >= 1 ? n : 1); }

}  // namespace parallel

template <class F>
void serial_for(std::size_t n, F&& body) {
    for (std::size_t i = 0; i < n; ++i) body(i);
}

template <class F>
void parallel_for(std::size_t n, F&& body) {
#ifdef _OPENMP
    const int nt = parallel::max_threads();
    if (nt > 1 && n > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(nt)
        for (long long i = 0; i < (long long)n; ++i) body((std::size_t)i);
        return;
    }
#endif
    serial_for(n, body);
}

}  // namespace tsc
