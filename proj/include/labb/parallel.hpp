#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace labb {

// Runs fn(i) for i in [0, n) on `threads` workers. Tasks must write to
// disjoint, index-addressed slots; results are then identical for any
// thread count, so callers stay bit-reproducible.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n)
                return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    unsigned k = std::min<std::size_t>(threads, n);
    pool.reserve(k);
    for (unsigned t = 0; t < k; ++t)
        pool.emplace_back(worker);
    for (auto& th : pool)
        th.join();
}

} // namespace labb
