#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string_view>

namespace prefopt {

enum class StreamPurpose : std::uint8_t {
  env_init = 0,
  data_collection = 1,
  model_init = 2,
  training = 3,
  evaluation = 4,
};

inline constexpr std::size_t kNumStreamPurposes = 5;

std::string_view to_string(StreamPurpose p) noexcept;

// Deterministic random stream keyed by (seed, purpose). Uses mt19937_64 and
// seed_seq, whose output sequences are fixed by the standard, and derives
// doubles and bounded integers by hand so draws do not depend on the
// standard library's distribution implementations.
class RngStream {
 public:
  RngStream(std::uint64_t seed, StreamPurpose purpose);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform on {0, ..., n-1}; n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  std::uint64_t seed() const noexcept { return seed_; }
  StreamPurpose purpose() const noexcept { return purpose_; }

 private:
  std::uint64_t seed_;
  StreamPurpose purpose_;
  std::mt19937_64 engine_;
};

class StreamSet {
 public:
  explicit StreamSet(std::uint64_t seed);

  RngStream& operator[](StreamPurpose p) { return streams_[static_cast<std::size_t>(p)]; }
  const RngStream& operator[](StreamPurpose p) const { return streams_[static_cast<std::size_t>(p)]; }

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::array<RngStream, kNumStreamPurposes> streams_;
};

// One independent stream per purpose. Throws std::invalid_argument for a
// negative seed.
StreamSet make_streams(std::int64_t seed);

}  // namespace prefopt
