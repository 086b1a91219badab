#pragma once

// Counter-based random streams (Philox4x32-10, Salmon et al. SC'11).
//
// Every logical object that consumes randomness (a Monte Carlo sample, a
// cycle in a branching exploration, a cell in a cell system) owns a stream
// keyed by a 64-bit hash derived from the run seed and the object's
// identity. Streams are stateless to create and independent of scheduling,
// so results are reproducible for any thread count.

#include <array>
#include <cmath>
#include <cstdint>

namespace trigf {

namespace philox {

constexpr uint32_t kMul0 = 0xD2511F53u;
constexpr uint32_t kMul1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

inline std::array<uint32_t, 4> block(uint64_t key, uint64_t counter,
                                     uint64_t counter_hi = 0) {
  uint32_t x0 = static_cast<uint32_t>(counter);
  uint32_t x1 = static_cast<uint32_t>(counter >> 32);
  uint32_t x2 = static_cast<uint32_t>(counter_hi);
  uint32_t x3 = static_cast<uint32_t>(counter_hi >> 32);
  uint32_t k0 = static_cast<uint32_t>(key);
  uint32_t k1 = static_cast<uint32_t>(key >> 32);
  for (int round = 0; round < 10; ++round) {
    uint64_t p0 = static_cast<uint64_t>(kMul0) * x0;
    uint64_t p1 = static_cast<uint64_t>(kMul1) * x2;
    uint32_t y0 = static_cast<uint32_t>(p1 >> 32) ^ x1 ^ k0;
    uint32_t y1 = static_cast<uint32_t>(p1);
    uint32_t y2 = static_cast<uint32_t>(p0 >> 32) ^ x3 ^ k1;
    uint32_t y3 = static_cast<uint32_t>(p0);
    x0 = y0;
    x1 = y1;
    x2 = y2;
    x3 = y3;
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return {x0, x1, x2, x3};
}

}  // namespace philox

// SplitMix64 finalizer; used to fold identities into stream keys.
constexpr uint64_t mix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr uint64_t derive_key(uint64_t parent, uint64_t salt) {
  return mix64(parent ^ mix64(salt));
}

class RandomStream {
 public:
  RandomStream() : key_(0) {}
  explicit RandomStream(uint64_t key) : key_(key) {}
  RandomStream(uint64_t parent, uint64_t salt) : key_(derive_key(parent, salt)) {}

  uint64_t key() const { return key_; }

  uint32_t next_u32() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }

  uint64_t next_u64() {
    uint64_t lo = next_u32();
    uint64_t hi = next_u32();
    return lo | (hi << 32);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as an argument to log().
  double next_double_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  bool next_bit() { return (next_u32() & 1u) != 0; }

  double next_exponential(double rate) { return -std::log(next_double_pos()) / rate; }

  double next_normal() {
    // Marsaglia polar method; caches the second deviate.
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_double() - 1.0;
      v = 2.0 * next_double() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double m = std::sqrt(-2.0 * std::log(s) / s);
    cached_ = v * m;
    have_cached_ = true;
    return u * m;
  }

  uint64_t next_poisson(double lambda);

  RandomStream child(uint64_t salt) const { return RandomStream(key_, salt); }

 private:
  void refill() {
    buf_ = philox::block(key_, ctr_++);
    pos_ = 0;
  }

  uint64_t key_;
  uint64_t ctr_ = 0;
  std::array<uint32_t, 4> buf_{};
  int pos_ = 4;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

namespace detail {

// Hormann's PTRD transformed-rejection Poisson sampler, exact for mu >= 10.
inline uint64_t poisson_ptrd(RandomStream& rs, double mu) {
  const double smu = std::sqrt(mu);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    double u;
    double v = rs.next_double();
    if (v <= 0.86 * v_r) {
      u = v / v_r - 0.43;
      return static_cast<uint64_t>(
          std::floor((2.0 * a / (0.5 - std::fabs(u)) + b) * u + mu + 0.445));
    }
    if (v >= v_r) {
      u = rs.next_double() - 0.5;
    } else {
      u = v / v_r - 0.93;
      u = (u < 0 ? -0.5 : 0.5) - u;
      v = rs.next_double() * v_r;
    }
    double us = 0.5 - std::fabs(u);
    if (us < 0.013 && v > us) continue;
    double k = std::floor((2.0 * a / us + b) * u + mu + 0.445);
    v = v * inv_alpha / (a / (us * us) + b);
    if (k >= 10.0) {
      if (std::log(v * smu) <=
          (k + 0.5) * std::log(mu / k) - mu - 0.5 * std::log(2.0 * M_PI) + k -
              (1.0 / 12.0 - 1.0 / (360.0 * k * k)) / k) {
        return static_cast<uint64_t>(k);
      }
    } else if (k >= 0.0) {
      if (std::log(v) <= k * std::log(mu) - mu - std::lgamma(k + 1.0)) {
        return static_cast<uint64_t>(k);
      }
    }
  }
}

}  // namespace detail

inline uint64_t RandomStream::next_poisson(double lambda) {
  if (lambda <= 0.0) return 0;
  if (lambda < 10.0) {
    // Knuth product-of-uniforms.
    double limit = std::exp(-lambda);
    uint64_t n = 0;
    double prod = next_double();
    while (prod > limit) {
      ++n;
      prod *= next_double();
    }
    return n;
  }
  return detail::poisson_ptrd(*this, lambda);
}

// Salt tags used when deriving sub-streams. Arbitrary distinct constants.
namespace salt {
constexpr uint64_t kSample = 0x5A4D504Cull;      // per-sample root
constexpr uint64_t kChildBase = 0x43484C44ull;   // +j for the j-th fresh child
constexpr uint64_t kFill = 0x46494C4Cull;        // frozen-hole filling
constexpr uint64_t kStub = 0x53545542ull;        // sub-floor subtree lifetime stubs
constexpr uint64_t kProxy = 0x50525859ull;       // small-jump Gaussian proxy
}  // namespace salt

}  // namespace trigf
