#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace screw_grasp::detail {

inline int default_parallelism() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Calls fn(i) for i in [0, count) on up to `parallelism` threads. fn must not
/// throw; it writes its result into slot i, so output order never depends on
/// scheduling.
template <class Fn>
void parallel_for(std::size_t count, int parallelism, Fn&& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, parallelism));
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto loop = [&] {
        for (std::size_t i = next++; i < count; i = next++) fn(i);
    };
    std::vector<std::thread> pool;
    const std::size_t n = std::min(workers, count);
    pool.reserve(n - 1);
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(loop);
    loop();
    for (auto& th : pool) th.join();
}

}  // namespace screw_grasp::detail
