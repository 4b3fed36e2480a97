#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace meandense {

// Worker count: explicit value if > 0, else $MEANDENSE_THREADS, else hardware concurrency.
inline unsigned resolve_threads(unsigned requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("MEANDENSE_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, n) on up to `threads` workers. Work is handed
/// out in chunks through an atomic cursor; body must only write to slots
/// owned by its index so results do not depend on scheduling. The first
/// exception thrown by any body is rethrown on the calling thread.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
    threads = std::max(1u, threads);
    if (threads == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const std::size_t chunk = std::max<std::size_t>(1, n / (std::size_t{threads} * 8));
    std::atomic<std::size_t> cursor{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t begin = cursor.fetch_add(chunk);
            if (begin >= n) return;
            const std::size_t end = std::min(n, begin + chunk);
            try {
                for (std::size_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!error) error = std::current_exception();
                cursor.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned spawn = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    pool.reserve(spawn);
    for (unsigned t = 0; t < spawn; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

/// Deterministic parallel reduction over [0, n).
///
/// The range is cut into a fixed number of contiguous blocks that does not
/// depend on the thread count. Each block folds its indices in order into a
/// copy of `init` with body(acc, i); the block results are then merged in
/// block order with merge(total, block). Floating-point results are
/// therefore identical for every thread count.
template <class Acc, class Body, class Merge>
Acc reduce_blocks(std::size_t n, unsigned threads, const Acc& init, Body&& body, Merge&& merge,
                  std::size_t blocks = 256) {
    blocks = std::max<std::size_t>(1, std::min(blocks, n));
    std::vector<Acc> partial(blocks, init);
    parallel_for(blocks, threads, [&](std::size_t b) {
        const std::size_t begin = n * b / blocks;
        const std::size_t end = n * (b + 1) / blocks;
        for (std::size_t i = begin; i < end; ++i) body(partial[b], i);
    });
    Acc total = init;
    for (const auto& p : partial) merge(total, p);
    return total;
}

} // namespace meandense
