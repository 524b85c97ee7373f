#pragma once

#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ellipq {

// explicit request, then ELLIPQ_THREADS, then the hardware
inline unsigned resolve_threads(unsigned requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("ELLIPQ_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return unsigned(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

// out[i] = fn(i); results land by index so ordering never depends on scheduling
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, unsigned threads, Fn fn) {
    std::vector<T> out(n);
    threads = std::max(1u, std::min<unsigned>(threads, unsigned(n ? n : 1)));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::exception_ptr err;
    std::mutex mu;
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < n; i += threads) out[i] = fn(i);
                } catch (...) {
                    std::lock_guard lk(mu);
                    if (!err) err = std::current_exception();
                }
            });
    }
    if (err) std::rethrow_exception(err);
    return out;
}

} // namespace ellipq
