#pragma once

#include <cstddef>
#include <functional>

namespace debiaskit {

// Worker cap from DEBIAS_KIT_THREADS; 0 or unset means hardware concurrency.
std::size_t worker_count();

// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index is
// visited exactly once; callers write to disjoint slots so results do not
// depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace debiaskit
