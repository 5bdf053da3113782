// Fixed-chunk parallel map-reduce. Work is cut into chunks whose boundaries
// depend only on the problem size; partial results are merged in chunk order,
// so the floating-point result is identical for any thread count.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace phasespace {

inline unsigned default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Runs body(begin, end) -> Partial for every chunk of [0, n) and folds the
/// partials with merge(acc, part) in ascending chunk order.
template <class Partial, class Body, class Merge>
Partial chunked_reduce(std::size_t n, std::size_t chunk, unsigned threads, Partial init, Body&& body, Merge&& merge) {
  if (chunk == 0) chunk = 1;
  const std::size_t n_chunks = (n + chunk - 1) / chunk;
  std::vector<Partial> parts(n_chunks, init);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      try {
        parts[c] = body(c * chunk, std::min(n, (c + 1) * chunk));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_chunks);
        return;
      }
    }
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, n_chunks))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  Partial acc = std::move(init);
  for (auto& p : parts) merge(acc, p);
  return acc;
}

/// Calls body(i) for i in [0, n); independent iterations only.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  struct Unit {};
  chunked_reduce(
      n, 1, threads, Unit{},
      [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) body(i);
        return Unit{};
      },
      [](Unit&, const Unit&) {});
}

}  // namespace phasespace
