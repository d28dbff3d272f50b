#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace twochoices {

/// Splits [0, count) into `workers` contiguous chunks and runs
/// fn(begin, end, chunk) on each, one thread per chunk beyond the first.
template <class Fn>
void parallel_chunks(std::size_t count, int workers, Fn&& fn)
{
    const std::size_t chunks = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1,
                                                       std::max<std::size_t>(count, 1));
    if (chunks == 1) {
        fn(std::size_t{0}, count, std::size_t{0});
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    auto guarded = [&](std::size_t begin, std::size_t end, std::size_t chunk) {
        try {
            fn(begin, end, chunk);
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error)
                error = std::current_exception();
        }
    };
    {
        std::vector<std::jthread> threads;
        threads.reserve(chunks - 1);
        for (std::size_t c = 1; c < chunks; ++c)
            threads.emplace_back(guarded, count * c / chunks, count * (c + 1) / chunks, c);
        guarded(0, count / chunks, 0);
    }
    if (error)
        std::rethrow_exception(error);
}

/// Runs fn(i) for every i in [0, count) on a pool of `workers` threads.
/// Indices are handed out dynamically; callers store results by index so the
/// outcome does not depend on scheduling.
template <class Fn>
void parallel_for_index(std::size_t count, int workers, Fn&& fn)
{
    const auto threads = static_cast<std::size_t>(std::max(workers, 1));
    if (threads == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    parallel_chunks(threads, static_cast<int>(threads), [&](std::size_t, std::size_t, std::size_t) {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
            fn(i);
    });
}

} // namespace twochoices
