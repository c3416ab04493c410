// SPDX-License-Identifier: Apache-2.0

#include "mumimo/parallel.hpp"

namespace mumimo {

namespace {
#ifdef _OPENMP
// Captured during static initialization, before any caller can change it.
const int initial_threads = omp_get_max_threads();
int default_threads() { return initial_threads; }
#endif
} // namespace

void set_worker_threads(int threads) {
#ifdef _OPENMP
    omp_set_num_threads(threads > 0 ? threads : default_threads());
#else
    (void)threads;
#endif
}

int worker_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace mumimo
