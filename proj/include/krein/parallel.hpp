#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace krein {

/// Worker cap: KREIN_SPECTRA_THREADS if set (>= 1), else hardware concurrency.
unsigned worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Results must
/// be written into per-index slots by the caller, so the merge is order-stable.
/// The exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace krein
