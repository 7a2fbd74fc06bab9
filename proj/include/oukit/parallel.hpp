#pragma once

#include <cstddef>
#include <functional>

namespace oukit {

/// Worker count: OU_KIT_THREADS if set, otherwise the hardware concurrency.
int thread_count();

/// Runs body(begin, end) over contiguous static chunks of [0, n). Each index must write only
/// its own output, which keeps results independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace oukit
