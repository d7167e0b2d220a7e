#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

#include "lmm/sparse.hpp"

namespace lmm::detail {

// Runs task(i, worker) for i in [0, n) on up to `workers` threads. Tasks are
// claimed dynamically; exceptions are rethrown in task order after all
// threads finish.
template <class Task>
void parallel_for(Index n, Index workers, Task task) {
  const Index nt = std::clamp<Index>(workers, 1, std::max<Index>(n, 1));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<Index> next{0};
  auto body = [&](Index worker) {
    for (Index i; (i = next.fetch_add(1)) < n;) {
      try {
        task(i, worker);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (nt == 1) {
    body(0);
  } else {
    std::vector<std::thread> pool;
    for (Index w = 0; w < nt; ++w) pool.emplace_back(body, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace lmm::detail
