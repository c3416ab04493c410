// SPDX-License-Identifier: Apache-2.0
//
// Blocked Monte Carlo driver shared by the estimators.
//
// Trials are cut into fixed blocks of `block_trials`. Each block is folded sequentially with
// Welford updates, then blocks are combined by a pairwise tree. The serial reference stores
// every per-trial value first and folds afterwards; the OpenMP kernel folds blocks as they are
// produced. Both perform the same floating-point operations in the same order.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <type_traits>
#include <span>
#include <vector>

#include "mumimo/montecarlo.hpp"

namespace mumimo::detail {

inline constexpr std::size_t block_trials = 1024;

struct Accumulator {
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double x) {
        count += 1.0;
        const double d = x - mean;
        mean += d / count;
        m2 += d * (x - mean);
    }

    static Accumulator merge(const Accumulator& a, const Accumulator& b) {
        if (a.count == 0.0) {
            return b;
        }
        if (b.count == 0.0) {
            return a;
        }
        Accumulator out;
        out.count = a.count + b.count;
        const double d = b.mean - a.mean;
        out.mean = a.mean + d * (b.count / out.count);
        out.m2 = a.m2 + b.m2 + d * d * (a.count * b.count / out.count);
        return out;
    }

    EstimatorOutput output() const {
        EstimatorOutput o;
        o.mean = mean;
        o.trials = static_cast<std::size_t>(count);
        o.std_dev = count > 1.0 ? std::sqrt(m2 / (count - 1.0)) : 0.0;
        o.half_width_95 = count > 0.0 ? 1.96 * o.std_dev / std::sqrt(count) : 0.0;
        return o;
    }
};

/// Pairwise tree: halves are reduced recursively, so the order depends only on the count.
inline Accumulator tree_merge(std::span<const Accumulator> accs) {
    if (accs.empty()) {
        return {};
    }
    if (accs.size() == 1) {
        return accs.front();
    }
    const std::size_t mid = accs.size() / 2;
    return Accumulator::merge(tree_merge(accs.first(mid)), tree_merge(accs.subspan(mid)));
}

/// Folds `blocks x stats` block accumulators (block-major) into one output per statistic.
inline std::vector<EstimatorOutput> reduce_blocks(const std::vector<Accumulator>& blocks, std::size_t stats) {
    const std::size_t n_blocks = blocks.size() / stats;
    std::vector<EstimatorOutput> out(stats);
    std::vector<Accumulator> column(n_blocks);
    for (std::size_t s = 0; s < stats; ++s) {
        for (std::size_t b = 0; b < n_blocks; ++b) {
            column[b] = blocks[b * stats + s];
        }
        out[s] = tree_merge(column).output();
    }
    return out;
}

/// Runs `trials` trials producing `stats` values each. `make_worker()` is called once per
/// thread and returns a callable worker(trial, std::span<double> out).
template <class MakeWorker>
std::vector<EstimatorOutput> run_trials(std::size_t trials, std::size_t stats, MakeWorker&& make_worker,
                                        Execution exec) {
    const std::size_t n_blocks = (trials + block_trials - 1) / block_trials;
    std::vector<Accumulator> blocks(n_blocks * stats);

    if (exec == Execution::serial_reference) {
        auto worker = make_worker();
        std::vector<double> values(trials * stats);
        for (std::size_t t = 0; t < trials; ++t) {
            worker(t, std::span<double>(values).subspan(t * stats, stats));
        }
        for (std::size_t t = 0; t < trials; ++t) {
            const std::size_t b = t / block_trials;
            for (std::size_t s = 0; s < stats; ++s) {
                blocks[b * stats + s].push(values[t * stats + s]);
            }
        }
        return reduce_blocks(blocks, stats);
    }

    std::exception_ptr error;
    std::mutex error_mutex;
    auto record = [&] {
        std::lock_guard lock(error_mutex);
        if (!error) {
            error = std::current_exception();
        }
    };
#pragma omp parallel
    {
        std::optional<std::decay_t<decltype(make_worker())>> worker;
        try {
            worker.emplace(make_worker());
        } catch (...) {
            record();
        }
        std::vector<double> values(stats);
#pragma omp for schedule(dynamic, 1)
        for (long long b = 0; b < static_cast<long long>(n_blocks); ++b) {
            if (!worker) {
                continue;
            }
            try {
                const std::size_t first = static_cast<std::size_t>(b) * block_trials;
                const std::size_t last = std::min(trials, first + block_trials);
                for (std::size_t t = first; t < last; ++t) {
                    (*worker)(t, std::span<double>(values));
                    for (std::size_t s = 0; s < stats; ++s) {
                        blocks[static_cast<std::size_t>(b) * stats + s].push(values[s]);
                    }
                }
            } catch (...) {
                record();
            }
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return reduce_blocks(blocks, stats);
}

} // namespace mumimo::detail
