#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace hmrf {

/// Calls fn(i) for i in [0, count), spreading indices round-robin over up to
/// `workers` threads. Results must be written to per-index slots so that the
/// outcome does not depend on the worker count.
template <class Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  const auto w = static_cast<std::size_t>(std::clamp<long>(workers, 1, static_cast<long>(std::max<std::size_t>(count, 1))));
  if (w <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::size_t t = 0; t < w; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < count; i += w) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace hmrf
