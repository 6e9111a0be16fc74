/**
 * @file corepath.hpp
 * @brief Lumped user-plane delay of the core-anchored path
 *        (gNB -> backhaul -> UPF/MB-UPF -> AF -> gNB).
 */
#pragma once

#include "mbsim/engine.hpp"
#include "mbsim/rng.hpp"

namespace mbsim {

struct CorePathModel {
  Sampler delay_sampler = Sampler::uniform(Duration{5000}, Duration{10000});

  /// Backhaul + UPF + AF budget row: uniform 5-10 ms.
  static CorePathModel budget() { return {}; }

  /// Sweep calibration: a fixed 10.5 ms core segment plus ~1.5-2 ms of
  /// radio terms gives the ~12 ms core-anchored average.
  static CorePathModel calibrated_sweep() { return CorePathModel{Sampler::fixed(Duration{10'500})}; }
};

/// Allowed sampler range unless a scenario explicitly overrides it.
inline constexpr Duration kCoreDelayMin{5000};
inline constexpr Duration kCoreDelayMax{12000};

/// One draw of T_BH/UPF/AF for a core-anchored PDU.
inline Duration core_segment(const CorePathModel& model, RngStream& rng) {
  return model.delay_sampler.sample(rng);
}

}  // namespace mbsim
