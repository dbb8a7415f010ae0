#include "wfal/rng.hpp"

#include <cmath>

#include "wfal/error.hpp"

namespace wfal {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

std::uint64_t hash_tag(std::string_view tag) {
  // FNV-1a, 64 bit.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  state_ = mix64(mix64(seed + kGolden) ^ mix64(stream_id + 0x632BE59BD9B4E019ULL));
}

std::uint64_t RngStream::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double RngStream::uniform() {
  // 53-bit mantissa, offset by half an ulp so the value lies strictly inside (0,1).
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double RngStream::gumbel() { return -std::log(-std::log(uniform())); }

std::size_t RngStream::uniform_index(std::size_t n) {
  if (n == 0) raise(ErrorCode::empty_input, "uniform_index: n must be positive");
  return static_cast<std::size_t>(
      (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

RngStream RngStream::substream(std::string_view tag, std::uint64_t a, std::uint64_t b) const {
  const std::uint64_t child =
      mix64(stream_id_ ^ hash_tag(tag) ^ mix64(a + 1) ^ (mix64(b + 2) << 1));
  return RngStream(seed_, child);
}

std::vector<std::size_t> RngStream::sample_without_replacement(std::size_t n, std::size_t k) {
  if (k > n) raise(ErrorCode::index_out_of_range, "sample_without_replacement: k > n");
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  std::vector<std::size_t> picked;
  picked.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + uniform_index(n - i);
    std::swap(pool[i], pool[j]);
    picked.push_back(pool[i]);
  }
  return picked;
}

}  // namespace wfal
