#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace flatlyap {

/// Runs fn(i) for i in [0, n) on `workers` threads. Each index is processed
/// exactly once and results must be written to index-addressed storage, so the
/// outcome never depends on the worker count. The first exception (lowest index)
/// is rethrown after all workers join.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::mutex guard;
    std::exception_ptr first_error;
    std::size_t first_index = n;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < n; i += workers) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(guard);
                        if (i < first_index) {
                            first_index = i;
                            first_error = std::current_exception();
                        }
                        return;
                    }
                }
            });
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace flatlyap
