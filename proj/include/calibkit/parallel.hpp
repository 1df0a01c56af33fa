#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace calibkit::detail {

/// Runs fn(job) for job in [0, jobs) over `threads` workers in contiguous
/// chunks. Each job must write only to its own output slot; results are then
/// independent of the thread count.
template <typename Fn>
void parallel_for(long jobs, int threads, Fn&& fn) {
    if (jobs <= 0) {
        return;
    }
    if (threads < 1) {
        threads = 1;
    }
    if (threads == 1 || jobs == 1) {
        for (long j = 0; j < jobs; ++j) {
            fn(j);
        }
        return;
    }
    const int workers = static_cast<int>(std::min<long>(threads, jobs));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    std::mutex error_mutex;
    std::exception_ptr first_error;
    const long chunk = (jobs + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const long begin = w * chunk;
        const long end = std::min(jobs, begin + chunk);
        pool.emplace_back([&, begin, end] {
            try {
                for (long j = begin; j < end; ++j) {
                    fn(j);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

}  // namespace calibkit::detail
