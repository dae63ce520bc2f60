#pragma once

#include <cstddef>
#include <functional>

namespace imsp {

// Process-wide worker count used by parallel_for; 0 means hardware concurrency.
void set_default_jobs(unsigned jobs);
unsigned default_jobs();

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Each index is handled
// by exactly one call, so callers that write only slot i get results that do
// not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned jobs = 0);

}  // namespace imsp
