#pragma once

#include <cstddef>
#include <functional>

namespace avlab {

// Runs fn(chunk_index) for every chunk in [0, num_chunks) on up to `workers`
// threads. Callers write results into per-chunk slots and reduce them in
// index order afterwards, so outputs do not depend on the worker count.
void parallel_chunks(std::size_t num_chunks, std::size_t workers,
                     const std::function<void(std::size_t)>& fn);

// Global default for modules that shard work (set by the CLI --workers flag).
std::size_t default_workers();
void set_default_workers(std::size_t workers);

}  // namespace avlab
