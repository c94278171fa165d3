#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace bdlab {

/// Worker cap: BDLAB_THREADS if set and positive, otherwise the hardware
/// concurrency (at least 1).
std::size_t worker_count();

/// Number of chunks to split `total` items into, given a minimum chunk size.
inline std::size_t plan_chunks(std::uint64_t total, std::uint64_t min_chunk) {
  if (min_chunk == 0) min_chunk = 1;
  const std::uint64_t by_size = std::max<std::uint64_t>(1, (total + min_chunk - 1) / min_chunk);
  return static_cast<std::size_t>(std::min<std::uint64_t>(worker_count(), by_size));
}

/// Calls fn(chunk, begin, end) for `chunks` contiguous slices of [0, total),
/// concurrently.  Callers keep one result slot per chunk and reduce them in
/// chunk order, which makes the outcome independent of the worker count
/// whenever the per-item computation is.
template <class Fn>
void run_chunks(std::uint64_t total, std::size_t chunks, Fn&& fn) {
  if (chunks == 0) chunks = 1;
  const std::uint64_t per = (total + chunks - 1) / chunks;
  std::vector<std::exception_ptr> errors(chunks);
  auto body = [&](std::size_t c) {
    const std::uint64_t begin = std::min<std::uint64_t>(total, c * per);
    const std::uint64_t end = std::min<std::uint64_t>(total, begin + per);
    try {
      fn(c, begin, end);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  if (chunks == 1) {
    body(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(chunks - 1);
    for (std::size_t c = 1; c < chunks; ++c) threads.emplace_back(body, c);
    body(0);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace bdlab
