#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace switchback {

/// SWITCHBACK_THREADS if set to a positive integer, else the hardware
/// concurrency (at least 1).
int default_thread_count();

/// Calls f(i) for i in [0, n) over contiguous static chunks. Callers write
/// into per-index slots and reduce afterwards in index order, which keeps
/// results independent of the thread count. The first exception thrown by
/// any worker is rethrown here.
template <class F>
void parallel_for(std::size_t n, F&& f, int threads = default_thread_count()) {
    if (threads < 1) threads = 1;
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = n * w / workers;
        const std::size_t end = n * (w + 1) / workers;
        pool.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace switchback
