#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace shape_rerank {

/// Thread count used when a caller passes 0. Reads SHAPE_RERANK_THREADS,
/// falling back to the hardware concurrency (at least 1).
unsigned default_thread_count();

/// Runs task(i) for i in [0, count). Tasks are handed out dynamically, so
/// callers must write results into per-task slots and reduce afterwards in
/// index order to stay independent of the thread count.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& task);

/// splitmix64 step; used to derive independent per-item seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

/// FNV-1a over bytes, stable across platforms.
std::uint64_t stable_hash(const void* data, std::size_t size,
                          std::uint64_t basis = 0xcbf29ce484222325ULL);

}  // namespace shape_rerank
