#pragma once

#include <cstddef>
#include <functional>

namespace heattrace {

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). Indices are handed out in contiguous blocks; each body call
/// must only write state owned by its index, which keeps results independent
/// of scheduling. The first exception (lowest index) is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, unsigned threads = 0);

}  // namespace heattrace
