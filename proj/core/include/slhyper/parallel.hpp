#pragma once

#include <cstddef>
#include <functional>

namespace slhyper {

// Worker count: SLHYPER_THREADS if set (>= 1), else the hardware concurrency.
int thread_count();

// Runs body(i) for i in [0, n). Each index writes only its own outputs, so
// results do not depend on scheduling. The exception from the smallest
// failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace slhyper
