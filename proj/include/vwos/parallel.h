#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace vwos {

// Static interleaved assignment; each item writes only its own slot, so
// output bits never depend on the thread count.
inline void parallel_for(long long n, int n_threads, const std::function<void(long long)>& fn) {
    if (n <= 0) return;
    n_threads = static_cast<int>(std::min<long long>(std::max(n_threads, 1), n));
    if (n_threads == 1) {
        for (long long i = 0; i < n; ++i) fn(i);
        return;
    }

    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
        workers.emplace_back([&, t] {
            try {
                for (long long i = t; i < n; i += n_threads) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
}

} // namespace vwos
