#pragma once

#include <cstddef>
#include <functional>

namespace recon {

/// Worker count: RECON_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) over contiguous chunks on up to worker_count()
/// threads. Each index is visited exactly once; callers keep writes disjoint.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace recon
