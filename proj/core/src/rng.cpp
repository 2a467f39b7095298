#include "prefopt/rng.hpp"

#include <limits>
#include <stdexcept>

namespace prefopt {

std::string_view to_string(StreamPurpose p) noexcept {
  switch (p) {
    case StreamPurpose::env_init: return "env-init";
    case StreamPurpose::data_collection: return "data-collection";
    case StreamPurpose::model_init: return "model-init";
    case StreamPurpose::training: return "training";
    case StreamPurpose::evaluation: return "evaluation";
  }
  return "unknown";
}

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed, StreamPurpose purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose),
                    0x70726566u};  // "pref"
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, StreamPurpose purpose)
    : seed_(seed), purpose_(purpose), engine_(seeded_engine(seed, purpose)) {}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = kMax - kMax % n;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

StreamSet::StreamSet(std::uint64_t seed)
    : seed_(seed),
      streams_{RngStream(seed, StreamPurpose::env_init),
               RngStream(seed, StreamPurpose::data_collection),
               RngStream(seed, StreamPurpose::model_init),
               RngStream(seed, StreamPurpose::training),
               RngStream(seed, StreamPurpose::evaluation)} {}

StreamSet make_streams(std::int64_t seed) {
  if (seed < 0) throw std::invalid_argument("make_streams: seed must be non-negative");
  return StreamSet(static_cast<std::uint64_t>(seed));
}

}  // namespace prefopt
