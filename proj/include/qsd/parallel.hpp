#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace qsd {

/// Run body(begin, end) over [0, n) split into contiguous chunks, one per
/// worker. Output must be written by index so results do not depend on the
/// chunking.
template <class Body>
void parallel_for_chunks(std::size_t n, Body&& body, std::size_t min_chunk = 256) {
    std::size_t workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(1, n / min_chunk));
    if (workers <= 1) {
        body(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t step = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t b = w * step;
        const std::size_t e = std::min(n, b + step);
        if (b >= e) break;
        pool.emplace_back([&body, b, e] { body(b, e); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace qsd
