#include "sgpnp/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace sgpnp {

std::size_t thread_budget()
{
  if (char const *env = std::getenv("SGPNP_THREADS")) {
    try {
      long const v = std::stol(env);
      if (v > 0) {
        return std::size_t(v);
      }
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

thread_local bool inside_worker = false;

} // namespace

void parallel_for(std::size_t n, std::function<void(std::size_t)> const &body)
{
  // nested calls run inline on the calling worker
  std::size_t const workers = inside_worker ? 1 : std::min(n, thread_budget());
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      body(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      inside_worker = true;
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) {
            failure = std::current_exception();
          }
        }
      }
    });
  }
  for (auto &t : pool) {
    t.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

} // namespace sgpnp
