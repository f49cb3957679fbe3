#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace certagg::par {

// Every data-parallel kernel in this library has two code paths: a plain
// sequential reference and an OpenMP one. Both must produce bit-identical
// results; tests compare them and the bench target times them.
enum class Exec { serial, parallel };

inline int max_workers() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_workers(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

}  // namespace certagg::par
