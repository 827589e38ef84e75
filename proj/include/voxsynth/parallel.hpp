#pragma once

#include <functional>

namespace voxsynth {

/// Runs fn(task) for task in [0, tasks) on up to `workers` threads. Tasks are
/// claimed in order; exceptions from workers are rethrown on the caller.
void parallel_for(int workers, int tasks, const std::function<void(int)>& fn);

/// Worker count after applying the SYNTH_THREADS environment override.
int resolve_threads(int requested);

}  // namespace voxsynth
