#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sysid/matrix.hpp"

namespace sysid {

// Addresses one reproducible random stream. Identical fields yield the same
// integer sequence bit-for-bit on every platform; derived streams (different
// label or trial) are statistically independent.
struct RngStream {
  std::uint64_t master_seed = 0;
  std::string stream_label;
  std::uint64_t trial_index = 0;
};

namespace detail {

inline std::uint64_t fnv1a64(const unsigned char* data, std::size_t len,
                             std::uint64_t hash = 0xcbf29ce484222325ULL) {
  for (std::size_t i = 0; i < len; ++i) {
    hash ^= static_cast<std::uint64_t>(data[i]);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline void append_u64_le(unsigned char* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  }
}

}  // namespace detail

// Seed derivation: FNV-1a over master_seed (little-endian) || label bytes ||
// trial_index (little-endian).
inline std::uint64_t derive_seed(const RngStream& stream) {
  unsigned char buf[8];
  detail::append_u64_le(buf, stream.master_seed);
  std::uint64_t h = detail::fnv1a64(buf, 8);
  h = detail::fnv1a64(reinterpret_cast<const unsigned char*>(stream.stream_label.data()),
                      stream.stream_label.size(), h);
  detail::append_u64_le(buf, stream.trial_index);
  return detail::fnv1a64(buf, 8, h);
}

// SplitMix64: the counter-based integer generator behind every stream.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Standard-normal sampler over a SplitMix64 stream. Uniform-to-normal
// transform is Box-Muller, fixed for the lifetime of the library:
//   u1 = ((a >> 11) + 1) * 2^-53   in (0, 1]
//   u2 = (b >> 11) * 2^-53         in [0, 1)
//   z0 = sqrt(-2 ln u1) cos(2 pi u2),  z1 = sqrt(-2 ln u1) sin(2 pi u2)
// The second variate of each pair is cached, so draw order is deterministic.
class NormalSampler {
 public:
  explicit NormalSampler(const RngStream& stream) : gen_(derive_seed(stream)) {}

  std::uint64_t next_u64() { return gen_.next(); }

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(gen_.next() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(gen_.next() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  SplitMix64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Draws `count` i.i.d. vectors L * g with g standard normal, where L is an
// n x n factor from psd_factor. Deterministic given the stream.
inline std::vector<Vector> draw_gaussian(const RngStream& stream, const Matrix& cov_factor,
                                         int count) {
  if (cov_factor.rows() != cov_factor.cols()) {
    throw InvalidInputError("draw_gaussian: cov_factor must be square");
  }
  if (count < 0) {
    throw InvalidInputError("draw_gaussian: negative count");
  }
  require_finite(cov_factor, "draw_gaussian cov_factor");
  const Eigen::Index n = cov_factor.rows();
  NormalSampler sampler(stream);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(count));
  Vector g(n);
  for (int i = 0; i < count; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      g(j) = sampler.next();
    }
    out.push_back(cov_factor * g);
  }
  return out;
}

}  // namespace sysid
