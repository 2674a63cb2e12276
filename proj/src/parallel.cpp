#include "gmshape/detail/parallel.hpp"

#include <exception>
#include <mutex>
#include <thread>

namespace gmshape {

namespace {
int g_threads = 0;  // 0 = hardware concurrency
}

void set_thread_count(int n) { g_threads = n < 0 ? 0 : n; }

int thread_count() {
  if (g_threads > 0) return g_threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace detail {

void run_slabs(std::size_t n_slabs, const std::function<void(std::size_t)>& slab_fn) {
  const std::size_t t = std::min<std::size_t>(thread_count(), n_slabs);
  if (t <= 1) {
    for (std::size_t s = 0; s < n_slabs; ++s) slab_fn(s);
    return;
  }

  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(t);
  for (std::size_t w = 0; w < t; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (std::size_t s = w; s < n_slabs; s += t) slab_fn(s);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : workers) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

}  // namespace gmshape
