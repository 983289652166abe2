#pragma once

#include <cstddef>

namespace difflow {

// Number of worker threads grid passes may use. Defaults to the hardware
// concurrency clamped by the DIFFLOW_THREADS environment variable; can be
// overridden at runtime (tests use this to prove results are independent of
// the worker count).
int worker_count();
void set_worker_count(int workers);

// Splits [0, count) into contiguous chunks and runs body(begin, end) on each,
// possibly from several threads. Chunk boundaries depend only on count and the
// worker count, and bodies must write to disjoint state, so any reduction over
// the results has to happen sequentially afterwards to stay deterministic.
void parallel_for(std::size_t count, const void* tag,
                  void (*body)(const void* tag, std::size_t begin, std::size_t end));

template <typename Body>
void parallel_for(std::size_t count, const Body& body) {
    parallel_for(count, &body, [](const void* tag, std::size_t begin, std::size_t end) {
        (*static_cast<const Body*>(tag))(begin, end);
    });
}

}  // namespace difflow
