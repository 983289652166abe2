#include "difflow/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace difflow {

namespace {

int initial_worker_count() {
    int workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    if (const char* env = std::getenv("DIFFLOW_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) workers = std::min(workers, cap);
    }
    return workers;
}

int& worker_count_ref() {
    static int workers = initial_worker_count();
    return workers;
}

}  // namespace

int worker_count() { return worker_count_ref(); }

void set_worker_count(int workers) { worker_count_ref() = std::max(1, workers); }

void parallel_for(std::size_t count, const void* tag,
                  void (*body)(const void* tag, std::size_t begin, std::size_t end)) {
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(worker_count()), count);
    if (workers <= 1 || count < 4) {
        body(tag, 0, count);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers - 1);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t begin = std::min(count, w * chunk);
        const std::size_t end = std::min(count, begin + chunk);
        if (begin < end) threads.emplace_back(body, tag, begin, end);
    }
    body(tag, 0, std::min(count, chunk));
    for (auto& t : threads) t.join();
}

}  // namespace difflow
