// Deterministic parallel batching: tasks are indexed, each task derives its
// own seed, and reductions run in index order so results are independent of
// the thread count.
#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>
#include <atomic>
#include <algorithm>

namespace curvcone {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for i in [0, count). Results must be written into per-index
// slots by the caller; no ordering is guaranteed during execution.
inline void parallel_for(std::size_t count, int threads,
                         const std::function<void(std::size_t)>& fn) {
    const int nt = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(count, 1));
    if (nt <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) break;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace curvcone
