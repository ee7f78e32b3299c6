#pragma once

#include <cstddef>
#include <functional>

namespace simplexlab {

/// Worker count: SIMPLEXLAB_THREADS when set, else `requested` when positive,
/// else the number of hardware threads.
int resolve_threads(int requested = 0);

/// Runs fn(chunk) for chunk in [0, num_chunks) on up to `threads` workers.
/// Callers write per-chunk results into preallocated slots and merge them in
/// chunk order afterwards, which keeps results independent of `threads`.
void parallel_chunks(std::size_t num_chunks, int threads,
                     const std::function<void(std::size_t)>& fn);

}  // namespace simplexlab
