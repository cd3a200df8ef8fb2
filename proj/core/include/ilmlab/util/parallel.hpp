#pragma once

#include <cstddef>
#include <functional>

namespace ilmlab::util {

/// Number of workers to use when the caller passes 0.
std::size_t default_workers() noexcept;

/// Runs body(i) for i in [0, n) on up to `workers` threads. Each index is
/// processed exactly once; callers write results into per-index slots so the
/// reduction order stays deterministic. The first exception is rethrown.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body);

}  // namespace ilmlab::util
