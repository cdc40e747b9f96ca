#pragma once

#include <cstddef>
#include <functional>

namespace stfreq {

/// Worker count used by parallel loops. Defaults to STFREQ_THREADS when set,
/// otherwise the number of logical cores.
unsigned default_threads();
void set_default_threads(unsigned threads);

/// Runs body(i) for i in [0, count). Each index must write only its own
/// output slot; results are then independent of the worker count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  unsigned threads = 0);

}  // namespace stfreq
