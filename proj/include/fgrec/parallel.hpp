#pragma once
// Deterministic data-parallel helper: contiguous index chunks, disjoint
// writes. Output must not depend on the thread count; reductions are the
// caller's job and must combine per-slot results in index order.

#include <cstddef>
#include <functional>

namespace fgrec {

// 0 (or negative) resolves to the hardware concurrency.
int resolve_threads(int requested);

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t begin, std::size_t end)>& fn);

}  // namespace fgrec
