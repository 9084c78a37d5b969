#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace chaoslab {

// Stream tags keep independent uses of the same (seed, index) pair apart.
enum class StreamTag : std::uint64_t {
  path = 0x70617468ULL,
  circulant_pair = 0x63697263ULL,
  mixture = 0x6d697874ULL,
  auxiliary = 0x61757869ULL,
  brownian = 0x62726f77ULL,
  identities = 0x6964656eULL,
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Key of the stream owned by (seed, index, tag). A pure function of its
/// arguments, so a stream never depends on batch size or scheduling.
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t index,
                                StreamTag tag = StreamTag::path) {
  std::uint64_t s = seed ^ (static_cast<std::uint64_t>(tag) * 0xd1342543de82ef95ULL);
  std::uint64_t a = splitmix64(s);
  s = a ^ (index + 0x632be59bd9b4e019ULL);
  std::uint64_t b = splitmix64(s);
  return b ^ splitmix64(s);
}

/// xoshiro256++ seeded from a stream key through splitmix64.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t key) {
    std::uint64_t s = key;
    for (auto& w : state_) w = splitmix64(s);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t state_[4];
};

/// Standard normal draws from one keyed stream.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t index, StreamTag tag = StreamTag::path)
      : engine_(stream_key(seed, index, tag)) {}

  double operator()() { return dist_(engine_); }
  double uniform() { return std::generate_canonical<double, 53>(engine_); }
  Xoshiro256& engine() { return engine_; }

 private:
  Xoshiro256 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace chaoslab
