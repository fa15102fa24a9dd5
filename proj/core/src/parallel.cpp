#include "sonn/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace sonn {

namespace {

int resolve_thread_count() {
    if (const char* env = std::getenv("SONN_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 0) return v <= 1 ? 1 : static_cast<int>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Below this many scalar ops, thread spawn overhead dominates.
constexpr std::size_t kMinParallelWork = 1u << 20;

}  // namespace

int thread_count() {
    static const int n = resolve_thread_count();
    return n;
}

void parallel_for(std::size_t count, std::size_t work_per_item,
                  const std::function<void(std::size_t, std::size_t)>& body) {
    const int threads = thread_count();
    if (threads <= 1 || count < 2 || count * work_per_item < kMinParallelWork) {
        body(0, count);
        return;
    }
    const std::size_t t = std::min<std::size_t>(threads, count);
    std::vector<std::thread> pool;
    pool.reserve(t - 1);
    for (std::size_t i = 1; i < t; ++i) {
        const std::size_t begin = count * i / t;
        const std::size_t end = count * (i + 1) / t;
        pool.emplace_back([&body, begin, end] { body(begin, end); });
    }
    body(0, count / t);
    for (auto& th : pool) th.join();
}

}  // namespace sonn
