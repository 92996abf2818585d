#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace onm::rng {

// SplitMix64 output mix (Stafford mix13 variant).
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Stream purposes.  Every consumer of randomness owns a distinct purpose so
// that replications and phases never share or reorder draws.
enum class Purpose : std::uint64_t {
  target_path = 1,
  measurement_noise = 2,
  constants_curvature = 3,
  constants_value = 4,
  instances = 5,
};

// A deterministic random stream keyed by (master seed, substream, purpose).
// Draw order within a stream is part of the contract: identical keys always
// produce identical sequences regardless of what other streams do, which is
// what makes threaded and serial runs byte-identical.
class Stream {
 public:
  Stream(std::uint64_t master_seed, std::uint64_t substream, Purpose purpose)
      : state_(derive(master_seed, substream, static_cast<std::uint64_t>(purpose))) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as a log() argument.
  double next_open_unit() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  bool next_coin() { return (next_u64() >> 63) != 0; }

  // Box-Muller.  Implemented inline (not std::normal_distribution) so the
  // bit stream is identical across standard libraries.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_open_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Isotropic unit vector.
  std::vector<double> next_unit_vector(std::size_t n) {
    std::vector<double> v(n);
    while (true) {
      double s = 0.0;
      for (auto& vi : v) {
        vi = next_gaussian();
        s += vi * vi;
      }
      const double norm = std::sqrt(s);
      if (norm > 1e-12) {
        for (auto& vi : v) vi /= norm;
        return v;
      }
    }
  }

 private:
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t sub, std::uint64_t purpose) {
    std::uint64_t z = mix64(seed + 0x9e3779b97f4a7c15ull);
    z = mix64(z ^ ((sub + 1) * 0xa0761d6478bd642full));
    z = mix64(z ^ ((purpose + 1) * 0xe7037ed1a0b428dbull));
    return z;
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace onm::rng
