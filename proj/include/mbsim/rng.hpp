/**
 * @file rng.hpp
 * @brief Seedable random streams and duration samplers.
 *
 * Every stream is derived from (scenario seed, label, keys...). Deriving a
 * fresh stream per consumer (e.g. per PDU and purpose) means adding a new
 * random consumer never shifts the values another consumer sees, and two
 * runs that differ only in routing still draw identical radio components.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "mbsim/engine.hpp"

namespace mbsim {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace detail

/// Derives a 64-bit sub-seed from a scenario seed, a stream label and any
/// number of integer keys.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                                    std::initializer_list<std::uint64_t> keys = {}) {
  std::uint64_t h = detail::splitmix64(seed ^ detail::fnv1a(label));
  for (std::uint64_t k : keys) h = detail::splitmix64(h ^ detail::splitmix64(k));
  return h;
}

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view label,
            std::initializer_list<std::uint64_t> keys = {})
      : label_(label), engine_(derive_seed(seed, label, keys)) {}

  const std::string& label() const { return label_; }

  /// Uniform double in [0, 1).
  double uniform01() { return std::generate_canonical<double, 53>(engine_); }

  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform01() < p;
  }

  double exponential(double mean) { return -mean * std::log1p(-uniform01()); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::string label_;
  std::mt19937_64 engine_;
};

/// A duration distribution: either a constant or uniform over an inclusive
/// integer-microsecond range.
class Sampler {
 public:
  struct Fixed {
    Duration value;
  };
  struct Uniform {
    Duration lo;
    Duration hi;
  };

  Sampler() : dist_(Fixed{Duration::zero()}) {}
  static Sampler fixed(Duration v) { return Sampler(Fixed{v}); }
  static Sampler uniform(Duration lo, Duration hi) {
    if (hi < lo) throw std::invalid_argument("uniform sampler: hi < lo");
    return Sampler(Uniform{lo, hi});
  }

  bool is_fixed() const { return std::holds_alternative<Fixed>(dist_); }
  Duration lo() const {
    return is_fixed() ? std::get<Fixed>(dist_).value : std::get<Uniform>(dist_).lo;
  }
  Duration hi() const {
    return is_fixed() ? std::get<Fixed>(dist_).value : std::get<Uniform>(dist_).hi;
  }
  /// Exact mean in microseconds.
  double mean_us() const { return 0.5 * static_cast<double>(lo().count() + hi().count()); }

  Duration sample(RngStream& rng) const {
    if (const auto* f = std::get_if<Fixed>(&dist_)) return f->value;
    const auto& u = std::get<Uniform>(dist_);
    return Duration{rng.uniform_int(u.lo.count(), u.hi.count())};
  }

  std::string describe() const {
    if (is_fixed()) return "fixed " + std::to_string(lo().count()) + " us";
    return "uniform [" + std::to_string(lo().count()) + ", " + std::to_string(hi().count()) +
           "] us";
  }

  friend bool operator==(const Sampler& a, const Sampler& b) {
    return a.is_fixed() == b.is_fixed() && a.lo() == b.lo() && a.hi() == b.hi();
  }

 private:
  explicit Sampler(std::variant<Fixed, Uniform> d) : dist_(d) {}
  std::variant<Fixed, Uniform> dist_;
};

}  // namespace mbsim
