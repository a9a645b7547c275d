#pragma once

#include <cstdint>
#include <functional>

namespace amnet {

// Worker count for parallel_for. 1 (the default) is the single-threaded
// reference mode; results are bit-identical for every setting because
// threads only partition loop indices, never reduction order.
void set_num_threads(int n);
int num_threads();

// Runs fn(i) for i in [begin, end). Each index is processed by exactly one
// worker; fn must not write outside the state owned by index i.
void parallel_for(std::int64_t begin, std::int64_t end, const std::function<void(std::int64_t)>& fn);

// Chunked variant: fn(lo, hi) over disjoint subranges.
void parallel_for_chunks(std::int64_t begin, std::int64_t end,
                         const std::function<void(std::int64_t, std::int64_t)>& fn);

}  // namespace amnet
