#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace elvlab {

// Worker count: hardware concurrency, capped by ELVLAB_THREADS when it holds a positive integer.
inline int thread_cap() {
    int hw = int(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("ELVLAB_THREADS")) {
        try {
            int cap = std::stoi(env);
            if (cap >= 1) return std::min(hw, cap);
        } catch (...) {
        }
    }
    return hw;
}

// Runs body(i) for i in [0, count) on a shared atomic queue; idle workers grab the next index.
// The first exception thrown by a body is rethrown after all workers stop.
template <class F>
void parallel_for(std::size_t count, F&& body, int threads = thread_cap()) {
    if (count == 0) return;
    const int workers = int(std::min<std::size_t>(std::max(1, threads), count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace elvlab
