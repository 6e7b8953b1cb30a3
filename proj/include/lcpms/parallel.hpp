#pragma once

#include <cstddef>
#include <cstdint>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace lcpms {

[[nodiscard]] inline bool in_parallel_region() noexcept {
#if defined(_OPENMP)
    return omp_in_parallel() != 0;
#else
    return false;
#endif
}

[[nodiscard]] inline int max_threads() noexcept {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int n) noexcept {
#if defined(_OPENMP)
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

/// Runs f(i) for i in [0, count). Falls back to a plain loop when `parallel`
/// is false or when already inside a parallel region. f must only write to
/// slots owned by i.
template <class F>
void parallel_for(std::size_t count, bool parallel, F&& f) {
    if (!parallel || count < 2 || in_parallel_region()) {
        for (std::size_t i = 0; i < count; ++i) f(i);
        return;
    }
    const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < n; ++i) f(static_cast<std::size_t>(i));
}

}  // namespace lcpms
