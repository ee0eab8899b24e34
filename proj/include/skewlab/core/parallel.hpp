#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace skewlab {

// Runs fn(chunk) for chunk in [0, chunks) on up to `threads` workers and
// returns the results in chunk order. Work is split into chunks by the
// caller, each with its own RNG stream, so the merged result never depends
// on how many threads ran.
template <class Fn>
auto run_chunks(std::size_t chunks, unsigned threads, Fn&& fn) {
    using R = decltype(fn(std::size_t{0}));
    std::vector<R> out(chunks);
    if (threads <= 1 || chunks <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) out[c] = fn(c);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            std::size_t c = next.fetch_add(1);
            if (c >= chunks) return;
            try {
                out[c] = fn(c);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(chunks);
                return;
            }
        }
    };
    std::vector<std::jthread> pool;
    const unsigned n = threads < chunks ? threads : static_cast<unsigned>(chunks);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    pool.clear();
    if (failure) std::rethrow_exception(failure);
    return out;
}

// Splits `total` items into chunks of at most `chunk` items.
inline std::vector<std::size_t> chunk_sizes(std::size_t total, std::size_t chunk) {
    std::vector<std::size_t> sizes;
    for (std::size_t done = 0; done < total; done += chunk)
        sizes.push_back(total - done < chunk ? total - done : chunk);
    return sizes;
}

// Neumaier summation, used wherever partial sums are merged.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        const double t = sum + x;
        if ((sum >= 0 ? sum : -sum) >= (x >= 0 ? x : -x))
            carry += (sum - t) + x;
        else
            carry += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + carry; }
};

}  // namespace skewlab
