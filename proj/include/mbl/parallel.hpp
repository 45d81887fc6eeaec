// parallel.hpp — Static-chunk parallel loop over an index range
//
// Results must be written to per-index slots by the callers; reductions are
// then performed sequentially in index order, which keeps every run bitwise
// reproducible regardless of the thread count.

#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mbl {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    const int nt = std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)),
                                         std::max<std::size_t>(n, 1));
    if (nt <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < nt; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (std::size_t i = static_cast<std::size_t>(w); i < n;
                     i += static_cast<std::size_t>(nt))
                    fn(i);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace mbl
