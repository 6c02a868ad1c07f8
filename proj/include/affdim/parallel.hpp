#pragma once

// Deterministic chunked parallelism. Work is split into a fixed number of
// chunks (independent of the worker count) and results are collected by chunk
// index, so every reduction is ordered and the output does not depend on how
// many threads actually ran.

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace affdim {

/// Global worker budget. 0 = auto (hardware concurrency).
int thread_budget();
void set_thread_budget(int n);

namespace detail {
inline std::atomic<int>& budget_slot() {
    static std::atomic<int> budget{0};
    return budget;
}
}  // namespace detail

inline int thread_budget() {
    int b = detail::budget_slot().load();
    if (b <= 0) {
        unsigned hc = std::thread::hardware_concurrency();
        b = hc > 0 ? static_cast<int>(hc) : 1;
    }
    return b;
}

inline void set_thread_budget(int n) { detail::budget_slot().store(n); }

/// Evaluates fn(chunk) for chunk in [0, n_chunks) on up to thread_budget()
/// workers and returns the results ordered by chunk index.
template <typename T, typename Fn>
std::vector<T> map_chunks(int n_chunks, Fn fn) {
    std::vector<T> results(static_cast<std::size_t>(n_chunks));
    int workers = thread_budget();
    if (workers > n_chunks) workers = n_chunks;
    if (workers <= 1) {
        for (int c = 0; c < n_chunks; ++c) results[static_cast<std::size_t>(c)] = fn(c);
        return results;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;) {
            const int c = next.fetch_add(1);
            if (c >= n_chunks || failed.load()) return;
            try {
                results[static_cast<std::size_t>(c)] = fn(c);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failed.load()) std::rethrow_exception(error);
    return results;
}

}  // namespace affdim
