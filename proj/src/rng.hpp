#pragma once

#include <cstdint>

#include "scalar.hpp"

namespace fermicas {

/// Deterministic splitmix64 generator; identical sequences on every platform,
/// which keeps seeded reports byte-reproducible.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [lo, hi] inclusive.
  int64_t uniform(int64_t lo, int64_t hi) {
    return lo + int64_t(next() % uint64_t(hi - lo + 1));
  }

  bool coin() { return (next() & 1) != 0; }

  /// Small exact scalar with numerators in [-max_num, max_num] and denominators
  /// in [1, max_den]; optionally complex.
  Scalar small_scalar(int max_num = 3, int max_den = 2, bool complex_part = true) {
    Rational re(uniform(-max_num, max_num), uniform(1, max_den));
    re.canonicalize();
    if (!complex_part) return Scalar(re);
    Rational im(uniform(-max_num, max_num), uniform(1, max_den));
    im.canonicalize();
    return Scalar(re, im);
  }

  /// Derives an independent child generator (for per-check seeds).
  Rng fork(uint64_t salt) {
    Rng child(state_ ^ (0xa0761d6478bd642fULL * (salt + 1)));
    child.next();
    return child;
  }

 private:
  uint64_t state_;
};

}  // namespace fermicas
