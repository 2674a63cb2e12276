#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <vector>

namespace gmshape {

/// Worker threads used by the parallel loops below (0 = hardware concurrency).
void set_thread_count(int n);
int thread_count();

namespace detail {

// Work is always split into the same fixed slabs regardless of the thread
// count, and slab results are combined in slab order, so reductions are
// bitwise reproducible for any --threads setting.
inline constexpr std::size_t kSlabs = 64;

void run_slabs(std::size_t n_slabs, const std::function<void(std::size_t)>& slab_fn);

}  // namespace detail

/// fn(begin, end) over [0, n), slab-parallel.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  if (n == 0) return;
  const std::size_t slabs = std::min<std::size_t>(detail::kSlabs, n);
  const std::size_t chunk = (n + slabs - 1) / slabs;
  detail::run_slabs(slabs, [&](std::size_t s) {
    const std::size_t b = s * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b < e) fn(b, e);
  });
}

/// Reduces fn(begin, end) -> Acc over [0, n); partials combined with += in
/// slab order.
template <typename Acc, typename Fn>
Acc parallel_reduce(std::size_t n, Acc zero, Fn&& fn) {
  if (n == 0) return zero;
  const std::size_t slabs = std::min<std::size_t>(detail::kSlabs, n);
  const std::size_t chunk = (n + slabs - 1) / slabs;
  std::vector<Acc> partials(slabs, zero);
  detail::run_slabs(slabs, [&](std::size_t s) {
    const std::size_t b = s * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b < e) partials[s] = fn(b, e);
  });
  Acc total = zero;
  for (const Acc& p : partials) total += p;
  return total;
}

}  // namespace gmshape
