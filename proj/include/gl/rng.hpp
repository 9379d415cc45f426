#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace gl {

// Counter-based random numbers. Every draw is a pure function of
// (seed, stream, counter, tag), so replicas can run on any number of
// threads and still produce bit-identical results. `stream` is the
// replica index; `tag` separates independent purposes (init sampling,
// MCMC proposals, field noise, walk jumps) within one replica.

enum class RngTag : std::uint64_t {
  init = 1,
  proposal = 2,
  accept = 3,
  field_noise = 4,
  walk_jump = 5,
  scratch = 6,
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

}  // namespace detail

inline std::uint64_t keyed_u64(std::uint64_t seed, std::uint64_t stream,
                               std::uint64_t counter, RngTag tag) {
  std::uint64_t h = detail::mix64(seed + 0x9e3779b97f4a7c15ULL);
  h = detail::mix64(h ^ (stream + 0xd1b54a32d192ed03ULL));
  h = detail::mix64(h ^ (counter + 0x8bb84b93962eacc9ULL));
  h = detail::mix64(h ^ (static_cast<std::uint64_t>(tag) + 0x2545f4914f6cdd1dULL));
  return h;
}

// Uniform on [0, 1).
inline double keyed_u01(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t counter, RngTag tag) {
  return static_cast<double>(keyed_u64(seed, stream, counter, tag) >> 11) *
         0x1.0p-53;
}

// Standard normal via Box-Muller; consumes counters 2c and 2c+1.
// Platform-independent given identical keys (no library distributions).
inline double keyed_normal(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t counter, RngTag tag) {
  const std::uint64_t a = keyed_u64(seed, stream, 2 * counter, tag);
  const std::uint64_t b = keyed_u64(seed, stream, 2 * counter + 1, tag);
  // u1 in (0, 1] so the log is finite.
  const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

// Stateful convenience wrapper: a (seed, stream) pair plus an advancing
// counter. Identical (seed, stream) reproduces identical draws.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream, RngTag tag = RngTag::scratch)
      : seed_(seed), stream_(stream), tag_(tag) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64() { return keyed_u64(seed_, stream_, counter_++, tag_); }

  double next_u01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double next_normal() {
    const double z = keyed_normal(seed_, stream_, counter_, tag_);
    counter_ += 1;  // keyed_normal consumes the pair (2c, 2c+1)
    return z;
  }

  // Derive an independent stream for a different purpose.
  RngStream with_tag(RngTag tag) const { return RngStream(seed_, stream_, tag); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  RngTag tag_;
  std::uint64_t counter_ = 0;
};

}  // namespace gl
