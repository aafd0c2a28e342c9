#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace polydg {

namespace detail {
inline std::atomic<unsigned>& thread_setting()
{
    static std::atomic<unsigned> n{1};
    return n;
}
} // namespace detail

/// Worker cap used by the assembly and analysis loops. 0 selects hardware concurrency.
inline void set_num_threads(unsigned n)
{
    if (n == 0)
        n = std::max(1u, std::thread::hardware_concurrency());
    detail::thread_setting().store(n);
}

inline unsigned num_threads() { return detail::thread_setting().load(); }

/// Runs body(i) for i in [0, count) on up to num_threads() workers using static
/// contiguous chunks. Results must be written to per-index storage; the first
/// exception thrown by any worker is rethrown on the calling thread.
template <typename Body>
void parallel_for(std::size_t count, Body&& body)
{
    const std::size_t workers = std::min<std::size_t>(num_threads(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            body(i);
        return;
    }

    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end)
            break;
        pool.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i)
                    body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

} // namespace polydg
