#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace posnet {

/// Number of worker threads to use; 0 means "ask the hardware".
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Run fn(block_index) for block_index in [0, n_blocks) across `threads`
/// workers. Blocks are assigned round-robin by index, so the partition of
/// work into blocks is independent of the thread count; callers that combine
/// per-block results in block order get bit-reproducible output.
inline void parallel_blocks(std::int64_t n_blocks, int threads,
                            const std::function<void(std::int64_t)>& fn) {
    threads = resolve_threads(threads);
    if (threads <= 1 || n_blocks <= 1) {
        for (std::int64_t b = 0; b < n_blocks; ++b) fn(b);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::int64_t b = t; b < n_blocks; b += threads) fn(b);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace posnet
