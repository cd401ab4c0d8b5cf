#pragma once
// Deterministic fork-join helper: the index range is split into one
// contiguous chunk per worker, so any per-worker output can be combined in
// worker order independent of scheduling.

#include <cstddef>
#include <thread>
#include <vector>

namespace iris {

inline int hardware_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

// fn(begin, end, worker) is invoked once per worker over [begin, end).
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (threads < 1) threads = 1;
    if (threads == 1 || n <= 1) {
        if (n > 0) fn(std::size_t{0}, n, 0);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(threads, n);
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end, w] { fn(begin, end, static_cast<int>(w)); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace iris
