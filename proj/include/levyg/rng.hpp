#pragma once

#include <cmath>
#include <cstdint>

namespace levyg {

// Philox4x32-10 counter-based generator.  Streams are keyed by
// (seed, stream index); draws with the same key and counter are identical
// regardless of how many streams exist or how work is scheduled, which is
// what makes path ensembles reproducible under any path count.
class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t stream)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32) ^ 0x9E3779B9u),
        ctr2_(static_cast<std::uint32_t>(stream)),
        ctr3_(static_cast<std::uint32_t>(stream >> 32)) {}

  std::uint32_t next_u32() {
    if (have_ == 0) {
      block();
      have_ = 4;
    }
    return out_[4 - have_--];
  }

  std::uint64_t next_u64() {
    std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // Uniform on (0,1); never returns 0 or 1 exactly.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  double normal() {
    if (have_normal_) {
      have_normal_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_normal_ = true;
    return r * std::cos(a);
  }

  // Exact inversion; intended for the small means that arise from
  // per-step thinning (lambda * dt << 1).
  int poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    double u = uniform();
    double p = std::exp(-lambda);
    double cdf = p;
    int k = 0;
    while (u > cdf && k < 10000) {
      ++k;
      p *= lambda / k;
      cdf += p;
    }
    return k;
  }

  // Index into a discrete distribution with the given weights (need not
  // be normalized).
  int categorical(const double* w, int n) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += w[i];
    double u = uniform() * total;
    for (int i = 0; i < n; ++i) {
      u -= w[i];
      if (u <= 0.0) return i;
    }
    return n - 1;
  }

 private:
  static std::uint32_t mulhi(std::uint32_t a, std::uint32_t b) {
    return static_cast<std::uint32_t>((static_cast<std::uint64_t>(a) * b) >> 32);
  }
  static std::uint32_t mullo(std::uint32_t a, std::uint32_t b) {
    return a * b;
  }

  void block() {
    std::uint32_t c0 = ctr0_, c1 = ctr1_, c2 = ctr2_, c3 = ctr3_;
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      std::uint32_t lo0 = mullo(0xD2511F53u, c0), hi0 = mulhi(0xD2511F53u, c0);
      std::uint32_t lo1 = mullo(0xCD9E8D57u, c2), hi1 = mulhi(0xCD9E8D57u, c2);
      std::uint32_t n0 = hi1 ^ c1 ^ k0;
      std::uint32_t n1 = lo1;
      std::uint32_t n2 = hi0 ^ c3 ^ k1;
      std::uint32_t n3 = lo0;
      c0 = n0; c1 = n1; c2 = n2; c3 = n3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    out_[0] = c0; out_[1] = c1; out_[2] = c2; out_[3] = c3;
    if (++ctr0_ == 0) ++ctr1_;
  }

  std::uint32_t key0_, key1_;
  std::uint32_t ctr0_ = 0, ctr1_ = 0, ctr2_, ctr3_;
  std::uint32_t out_[4] = {0, 0, 0, 0};
  int have_ = 0;
  bool have_normal_ = false;
  double spare_ = 0.0;
};

}  // namespace levyg
