#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace qlens {

// Worker budget: the QLENS_THREADS environment variable caps it, otherwise
// whatever the hardware reports (at least one).
inline int max_threads() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("QLENS_THREADS")) {
        try {
            const int requested = std::stoi(env);
            if (requested >= 1) return std::min(requested, hw);
        } catch (...) {
        }
    }
    return hw;
}

// Runs fn(i) for i in [0, count).  Each index must write only to its own
// result slot, so the schedule cannot influence the outcome.  Exceptions are
// collected and the first one rethrown on the caller's thread.
template <typename Fn>
void parallel_for(long long count, Fn&& fn) {
    const int workers = static_cast<int>(std::min<long long>(max_threads(), count));
    if (workers <= 1) {
        for (long long i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<long long> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (long long i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace qlens
