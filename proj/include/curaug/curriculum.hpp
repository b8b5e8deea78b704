// Copyright (c) 2026 the curaug authors
// Licensed under the Apache License, Version 2.0.

#pragma once

#include "curaug/core.hpp"

namespace curaug {

/**
 * Maps the epoch index to augmentation difficulty. The defaults reproduce
 * the doubling schedule exactly: 1, 2, 4, 8, 16, ... sub-regions, one
 * 32x32 erasure box, saturating at 256 regions. base and growth_factor are
 * generality knobs for schedule sweeps; leave them alone for the stock
 * behavior.
 */
struct CurriculumSchedule {
  int base = 1;
  int growth_factor = 2;
  int max_regions = 256;
  int box = 32;

  void validate() const {
    if (base < 1) {
      throw InvalidParameter("schedule: base must be >= 1");
    }
    if (growth_factor < 1) {
      throw InvalidParameter("schedule: growth_factor must be >= 1");
    }
    if (box < 1) {
      throw InvalidParameter("schedule: box must be >= 1");
    }
    if (max_regions < base) {
      throw InvalidParameter("schedule: max_regions must be >= base");
    }
    if (static_cast<long long>(base) > static_cast<long long>(box) * box) {
      throw InvalidParameter("schedule: base exceeds box pixel area");
    }
    // max_regions must be reachable: base * growth_factor^k for some k
    long long r = base;
    while (r < max_regions && growth_factor > 1) {
      r *= growth_factor;
    }
    if (r != max_regions) {
      throw InvalidParameter("schedule: max_regions must be base times a power of growth_factor");
    }
  }
};

struct DifficultyParams {
  int n_regions = 1;
  int box = 32;

  friend bool operator==(const DifficultyParams&, const DifficultyParams&) = default;
};

/**
 * Sub-region count for an epoch: base * growth_factor^epoch, saturating at
 * max_regions and at the box pixel area so no sub-region can come out empty.
 * Monotone non-decreasing in epoch; never overflows.
 */
inline int regions_for_epoch(const CurriculumSchedule& schedule, int epoch) {
  schedule.validate();
  if (epoch < 0) {
    throw InvalidParameter("regions_for_epoch: epoch must be >= 0");
  }
  const long long box_area =
      static_cast<long long>(schedule.box) * schedule.box;
  long long regions = schedule.base;
  if (schedule.growth_factor > 1) {
    for (int e = 0; e < epoch; ++e) {
      const long long next = regions * schedule.growth_factor;
      if (next > schedule.max_regions || next > box_area) {
        break;
      }
      regions = next;
    }
  }
  return static_cast<int>(regions);
}

inline DifficultyParams params_for_epoch(const CurriculumSchedule& schedule, int epoch) {
  return DifficultyParams{regions_for_epoch(schedule, epoch), schedule.box};
}

}  // namespace curaug
