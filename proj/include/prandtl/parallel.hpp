#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace prandtl {

// Worker count: hardware concurrency capped by PRANDTL_THREADS.
unsigned thread_count();

// Runs body(i) for i in [0, n) split into contiguous chunks. The split depends
// only on n and thread_count(), so results are reproducible for a fixed cap.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
    const std::size_t nt = std::min<std::size_t>(thread_count(), n);
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const std::size_t chunk = (n + nt - 1) / nt;
    for (std::size_t w = 0; w < nt; ++w) {
        const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace prandtl
