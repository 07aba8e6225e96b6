#pragma once

#include <cstddef>
#include <functional>

namespace seqtopo {

// Process-wide bound on intra-stage parallelism. 1 (the default) runs every
// loop on the calling thread, which makes all results bit-reproducible.
void set_worker_count(int workers);
int worker_count();

// Calls body(begin, end) over contiguous, disjoint chunks covering [0, n).
// Chunk boundaries depend only on n and the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace seqtopo
