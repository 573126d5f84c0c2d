#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace homolens {

/// Worker count resolution: explicit request > HOMOLENS_WORKERS env > hardware.
inline unsigned resolve_workers(unsigned requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("HOMOLENS_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Runs f(i) for i in [0, count) across a worker pool. Units must be
/// independent; callers deposit results by index so aggregation order does
/// not depend on scheduling.
template <class F>
void parallel_for(std::size_t count, unsigned workers, F&& f) {
    workers = resolve_workers(workers);
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const unsigned n_threads = static_cast<unsigned>(
        std::min<std::size_t>(workers, count));
    pool.reserve(n_threads);
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (unsigned k = 0; k < n_threads; ++k) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace homolens
