#ifndef GLOBENV_PARALLEL_HPP
#define GLOBENV_PARALLEL_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace globenv {

/// Worker count used by parallel_for; 0 or 1 runs inline.
void set_thread_count(std::size_t threads);
std::size_t thread_count();

/// Runs body(i) for i in [0, n). Every index is processed exactly once and
/// results must only be written to per-index slots, so the outcome does not
/// depend on the number of threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Independent generator for replicate `stream` of a run seeded with `seed`.
std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream);

}  // namespace globenv

#endif
