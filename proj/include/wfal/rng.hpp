#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace wfal {

// Deterministic, platform-independent random stream. Uses a splitmix64 walk,
// so a stream is fully described by (seed, stream_id) and substreams can be
// derived by hashing: consuming one stream never affects another. That keyed
// derivation is what makes replays bit-identical regardless of which
// components happen to draw, and in which order the experiment evaluates them.
//
// The standard <random> distributions are not pinned across library
// implementations, which is why uniform/normal/gumbel are implemented here.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();
  // Uniform on the open interval (0,1); never returns 0 or 1, so logs are safe.
  double uniform();
  // Standard normal via Box-Muller (two uniforms per draw, no cached spare).
  double normal();
  // Standard Gumbel: -log(-log(u)).
  double gumbel();
  // Uniform index in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n);

  // Derived stream keyed by a component tag and up to two integers
  // (typically iteration and run counters).
  RngStream substream(std::string_view tag, std::uint64_t a = 0, std::uint64_t b = 0) const;

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      using std::swap;
      swap(values[i - 1], values[j]);
    }
  }

  // k distinct indices drawn from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t state_ = 0;
};

std::uint64_t hash_tag(std::string_view tag);

}  // namespace wfal
