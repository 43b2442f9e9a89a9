#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace lcn {

// Deterministic splitmix64 generator. The standard <random> distributions are
// implementation-defined, so all sampling goes through this to keep outputs
// reproducible bit-for-bit across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // unbiased uniform integer in [0, n)
  std::uint64_t next_below(std::uint64_t n) {
    if (n <= 1) return 0;
    std::uint64_t limit = ~0ULL - (~0ULL % n);
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  bool bernoulli(double p) { return next_double() < p; }

  // uniform point on the m-simplex (normalized exponentials)
  std::vector<double> simplex_point(int m) {
    std::vector<double> p(m);
    double sum = 0;
    for (int i = 0; i < m; ++i) {
      double u = next_double();
      if (u < 1e-300) u = 1e-300;
      p[i] = -std::log(u);
      sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
  }

  // Derive an independent stream; used to split one benchmark seed into
  // per-puzzle / per-start substreams.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    Rng r(seed ^ (0x632be59bd9b4e019ULL + stream * 0x9e3779b97f4a7c15ULL));
    r.next_u64();
    return r.next_u64();
  }

  static std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return derive(derive(seed, a), b);
  }

 private:
  std::uint64_t state_;
};

}  // namespace lcn
