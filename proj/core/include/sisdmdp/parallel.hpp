#pragma once

#include <cstddef>
#include <functional>

namespace sisdmdp {

/// Worker cap from SISDMDP_THREADS (unset or 0 = hardware concurrency).
std::size_t worker_count();

/// Runs fn(i) for i in [0, n). Tasks must write to disjoint outputs; the
/// result is then independent of scheduling. Runs inline when `parallel` is
/// false or only one worker is available.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, bool parallel = true);

} // namespace sisdmdp
