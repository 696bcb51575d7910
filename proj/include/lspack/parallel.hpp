#pragma once
//
// Thread configuration shared by all kernels.
//
// Kernels parallelize over row blocks. Results are deterministic up to
// floating-point reassociation; strict mode forces a single worker so that
// repeated runs are bitwise identical regardless of the configured count.
//

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>

#include <Eigen/Core>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lspack {

namespace detail {

struct thread_config {
    int  threads = 0;      // 0: not yet resolved
    bool strict  = false;
};

inline thread_config & config() {
    static thread_config cfg;
    return cfg;
}

inline int default_threads() {
    if (const char * env = std::getenv("LSPACK_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0)
            return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

} // namespace detail

inline void set_threads(int n) {
    detail::config().threads = n > 0 ? n : detail::default_threads();
    Eigen::setNbThreads(detail::config().strict ? 1 : detail::config().threads);
}

inline void set_strict(bool strict) {
    detail::config().strict = strict;
    set_threads(detail::config().threads);
}

inline bool strict_mode() { return detail::config().strict; }

inline int configured_threads() {
    if (detail::config().threads == 0)
        detail::config().threads = detail::default_threads();
    return detail::config().threads;
}

// Worker count the kernels actually use.
inline int num_workers() { return strict_mode() ? 1 : configured_threads(); }

inline int worker_id() {
#ifdef _OPENMP
    return omp_get_thread_num();
#else
    return 0;
#endif
}

} // namespace lspack
