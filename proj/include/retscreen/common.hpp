#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace retscreen {

enum class Errc {
  duplicate_image_id,
  label_conflict,
  bad_enum,
  missing_field,
  empty_cohort,
  invalid_config,
  io_read_failure,
  io_write_failure,
  bad_target,
  crop_too_large,
  shape_mismatch,
  mode_mismatch,
  checkpoint_io,
  checkpoint_shape_mismatch,
  one_class_only,
  divergence,
  unknown_individual,
  no_images,
  empty_input,
  bad_usage,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  Errc code() const { return code_; }
  const char* code_name() const { return errc_name(code_); }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

// splitmix64 finalizer. All derived seeds in the pipeline come from chaining
// this over (base seed, tag, indices), which makes generation order-independent.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t seed, uint64_t value) {
  return splitmix64(seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t derive_seed(uint64_t base, std::string_view tag, uint64_t a = 0, uint64_t b = 0) {
  return hash_combine(hash_combine(hash_combine(base, fnv1a64(tag)), a), b);
}

// Deterministic RNG. Every sampling routine is pinned here rather than taken
// from <random> distributions, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive bounds, unbiased
  int64_t uniform_int(int64_t lo, int64_t hi) {
    uint64_t range = static_cast<uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<int64_t>(gen_());
    uint64_t lim = (0 - range) % range;
    uint64_t x;
    do {
      x = gen_();
    } while (x < lim);
    return lo + static_cast<int64_t>(x % range);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller; consumes exactly two uniforms per draw
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Fisher-Yates with pinned index sampling
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

// standard normal CDF
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / 1.41421356237309504880); }

// Runs fn(i) for i in [0, n) split into contiguous chunks across up to
// `threads` workers. Chunking keeps any caller-side accumulation order fixed.
void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn);

std::string format_double(double v);  // shortest round-trip-exact form
std::string format_fixed(double v, int digits);

}  // namespace retscreen
