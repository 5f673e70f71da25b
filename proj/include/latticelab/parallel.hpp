#ifndef LATTICELAB_PARALLEL_HPP
#define LATTICELAB_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace latticelab {

/// Evaluates fn(i) for i in [0, n) and returns the results in index order.
///
/// Work is split into contiguous blocks over hardware threads; reductions
/// over the returned vector are therefore independent of the thread count.
template <typename Fn>
auto parallel_map(std::size_t n, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))>
{
  using R = decltype(fn(std::size_t{}));
  std::vector<R> out(n);
  std::size_t const workers =
    std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      out[i] = fn(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    std::size_t const block = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w * block; i < std::min(n, (w + 1) * block); ++i)
            out[i] = fn(i);
        }
        catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto const& e : errors)
    if (e)
      std::rethrow_exception(e);
  return out;
}

} // namespace latticelab

#endif
