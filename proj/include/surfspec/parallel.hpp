#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace surfspec {

// Worker count: hardware concurrency capped by the SURFSPEC_THREADS
// environment variable (values < 1 are treated as 1).
std::size_t worker_count();

// Evaluates fn(i) for i in [0, n) and returns the results in index order.
// Work is distributed over worker_count() threads; the reduction order seen
// by the caller is always 0,1,...,n-1 regardless of scheduling.
template <typename T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& fn) {
    std::vector<T> out(n);
    const std::size_t workers = std::min(worker_count(), n ? n : std::size_t(1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) out[i] = fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

} // namespace surfspec
