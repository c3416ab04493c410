// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mumimo {

/// Kernel flavour. `serial_reference` is the plain single-threaded path the parallel
/// kernels are tested against; both produce bitwise-identical results.
enum class Execution { serial_reference, parallel };

/// 0 restores the OpenMP default.
void set_worker_threads(int threads);
int worker_threads();

/// Runs fn(i) for i in [0, n). Work items must write only to their own slots.
/// The first exception thrown by any item is rethrown on the calling thread.
template <class Fn>
void for_each_index(std::size_t n, Fn&& fn, Execution exec = Execution::parallel) {
    if (exec == Execution::serial_reference) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < count; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) {
                error = std::current_exception();
            }
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

} // namespace mumimo
