#pragma once

#include <cstdint>
#include <thread>
#include <vector>

namespace brw {

// Static block partition over [0, n). Each index is processed exactly once
// and results must be written to per-index slots, so the outcome does not
// depend on the thread count.
template <class Fn>
void parallel_for(std::int64_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    int nt = std::min<std::int64_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (int w = 0; w < nt; ++w) {
        std::int64_t lo = n * w / nt, hi = n * (w + 1) / nt;
        pool.emplace_back([lo, hi, &fn] {
            for (std::int64_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace brw
