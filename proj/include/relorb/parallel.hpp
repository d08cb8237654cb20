#pragma once

#include <atomic>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace relorb {

// Index-based parallel map: work items are claimed from a shared counter and
// results land in caller-owned slots, so the outcome is independent of the
// worker count and of scheduling.
template <class Fn>
void parallel_for(size_t count, int threads, Fn&& fn) {
    if (threads < 1) throw std::invalid_argument("parallel_for: threads must be >= 1");
    if (threads == 1 || count <= 1) {
        for (size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    size_t nthreads = std::min<size_t>(static_cast<size_t>(threads), count);
    pool.reserve(nthreads);
    for (size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace relorb
