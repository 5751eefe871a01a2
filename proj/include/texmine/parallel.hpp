#ifndef TEXMINE_PARALLEL_HPP
#define TEXMINE_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace texmine {

inline int resolve_jobs(int jobs) {
    if (jobs > 0)
        return jobs;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Work items are pulled
/// from a shared counter, so fn must write only to slot i of its outputs.
/// fn must not throw.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    const auto workers = static_cast<std::size_t>(std::min<std::size_t>(resolve_jobs(jobs), std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++)
                fn(i);
        });
    }
}

} // namespace texmine

#endif // TEXMINE_PARALLEL_HPP
