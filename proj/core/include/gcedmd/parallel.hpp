#pragma once

#include <functional>

namespace gcedmd {

// Global worker count for data-parallel loops. 0 or 1 disables threading.
void set_num_threads(int n);
int num_threads();

// Runs fn(i) for i in [0, n). Iterations must write disjoint outputs; the
// scheduler makes no ordering guarantee. Reductions must stay outside so
// results are bit-identical for any thread count.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace gcedmd
