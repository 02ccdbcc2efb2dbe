#pragma once

#include <cstddef>
#include <functional>

namespace conjcalc {

/// Worker cap: CONJCALC_THREADS when set to an integer >= 1, else the hardware
/// concurrency (at least 1).
int thread_count();

/// Runs body(i) for i in [0, count). Each index is processed exactly once and
/// the assignment of indices to workers does not affect results, as long as
/// body(i) only writes state owned by index i.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace conjcalc
