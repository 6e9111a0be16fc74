/**
 * @file traffic.hpp
 * @brief On/off source traffic.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mbsim/engine.hpp"
#include "mbsim/rng.hpp"

namespace mbsim {

struct OnOffProfile {
  Duration on_time{10'000};
  Duration off_time{90'000};
  std::int64_t data_rate_bps = 1'000'000;
  std::int64_t packet_bits = 1002;
  // Exponential spacing inside ON windows instead of the fixed fluid spacing.
  bool exp_interarrival = false;

  Duration period() const { return on_time + off_time; }

  /// Offset of the i-th packet from the start of an ON window. Integer
  /// arithmetic so long windows do not accumulate rounding drift.
  Duration offset_of(std::int64_t i) const {
    return Duration{i * packet_bits * 1'000'000 / data_rate_bps};
  }

  Duration interarrival() const { return offset_of(1); }

  bool valid() const {
    return on_time > Duration::zero() && off_time > Duration::zero() && data_rate_bps > 0 &&
           packet_bits > 0;
  }
};

/**
 * Arrival times in [0, horizon) of one on/off source.
 *
 * Cycles of length on+off start at -phase. Within each ON window packets
 * are spaced at packet_bits / data_rate, the first one at the window start.
 * With exp_interarrival set, spacing is exponential with the same mean and
 * @p rng must be non-null.
 */
inline std::vector<SimTime> generate_arrivals(const OnOffProfile& profile, Duration horizon,
                                              Duration phase, RngStream* rng = nullptr) {
  std::vector<SimTime> out;
  if (horizon <= Duration::zero()) return out;
  if (phase < Duration::zero() || phase >= profile.period()) {
    throw InvariantViolation("generate_arrivals: phase outside [0, on+off)");
  }
  if (profile.exp_interarrival && rng == nullptr) {
    throw InvariantViolation("generate_arrivals: exponential spacing needs a random stream");
  }
  const double mean_gap = static_cast<double>(profile.packet_bits) * 1e6 /
                          static_cast<double>(profile.data_rate_bps);

  for (Duration start = -phase; start < horizon; start += profile.period()) {
    const Duration window_end = start + profile.on_time;
    if (!profile.exp_interarrival) {
      for (std::int64_t i = 0;; ++i) {
        const Duration t = start + profile.offset_of(i);
        if (t >= window_end || t >= horizon) break;
        if (t >= Duration::zero()) out.push_back(SimTime{t});
      }
    } else {
      for (Duration t = start; t < window_end && t < horizon;) {
        if (t >= Duration::zero()) out.push_back(SimTime{t});
        const auto gap = static_cast<std::int64_t>(std::llround(rng->exponential(mean_gap)));
        t += Duration{std::max<std::int64_t>(gap, 1)};
      }
    }
  }
  return out;
}

/// One phase uniform over [0, on+off), drawn from @p rng.
inline Duration draw_phase(const OnOffProfile& profile, RngStream& rng) {
  return Duration{rng.uniform_int(0, profile.period().count() - 1)};
}

inline std::vector<Duration> assign_phases(std::size_t n_sources, const OnOffProfile& profile,
                                           RngStream& rng) {
  std::vector<Duration> phases;
  phases.reserve(n_sources);
  for (std::size_t i = 0; i < n_sources; ++i) phases.push_back(draw_phase(profile, rng));
  return phases;
}

}  // namespace mbsim
