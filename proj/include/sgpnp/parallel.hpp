#pragma once

#include <cstddef>
#include <functional>

namespace sgpnp {

/// Worker count: SGPNP_THREADS if set and positive, else hardware concurrency.
std::size_t thread_budget();

/// Runs body(i) for i in [0, n) on up to thread_budget() threads. Each index is
/// executed exactly once; the first exception thrown is rethrown after all
/// workers join. Calls made from inside a worker run serially.
void parallel_for(std::size_t n, std::function<void(std::size_t)> const &body);

} // namespace sgpnp
