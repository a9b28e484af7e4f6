#pragma once

#include <cstddef>
#include <functional>

namespace voxdim {

/// Hardware concurrency, at least 1.
unsigned default_jobs() noexcept;

/// Calls fn(i) for every i in [0, count) on up to `jobs` threads. Work is
/// handed out dynamically, so fn must write its result to slot i rather than
/// append. If any call throws, remaining work is abandoned and the first
/// exception is rethrown after all threads join.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn);

}  // namespace voxdim
