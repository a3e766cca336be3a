#pragma once

#include <cstddef>
#include <functional>

namespace lirec {

// Parallelism cap: min(hardware threads, LIREC_THREADS when set). A cap of 1
// runs everything inline.
std::size_t thread_cap();

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks across at
// most thread_cap() threads. Each index must write only its own output slot;
// callers reduce in index order afterwards, so results never depend on the
// thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace lirec
