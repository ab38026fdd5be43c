#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace roughheat {

/// Process-wide default worker count used when a caller passes workers = 0.
void set_default_workers(int workers);
int default_workers();

/// Runs fn(chunk, begin, end) over [0, n) split into chunks of `chunk_size`.
/// Chunk boundaries do not depend on the worker count, so any per-chunk
/// output reduced in chunk order is identical for every worker count.
void for_chunks(std::size_t n, std::size_t chunk_size, int workers,
                const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

inline std::size_t chunk_count(std::size_t n, std::size_t chunk_size) {
  return (n + chunk_size - 1) / chunk_size;
}

std::uint64_t splitmix64(std::uint64_t x);

/// Independent random stream keyed by (seed, stream id).
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

}  // namespace roughheat
