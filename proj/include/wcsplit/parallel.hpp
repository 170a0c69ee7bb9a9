#pragma once

#include <cstddef>
#include <functional>

namespace wcsplit {

// Worker count used by parallel loops. Defaults to the hardware concurrency,
// capped by the WCSPLIT_THREADS environment variable when set.
std::size_t worker_count();

// Process-wide override; 0 restores the environment/default behaviour.
void set_worker_count(std::size_t workers);

// Runs body(i) for i in [begin, end) over contiguous blocks, one per worker.
// Each index is visited exactly once, so results written per index do not
// depend on the number of workers.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body);

}  // namespace wcsplit
