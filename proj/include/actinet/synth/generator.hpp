#pragma once

// Seeded generator of labeled synthetic actigraphy series. Days run
// midnight-to-midnight; a series starts mid-sleep at 00:00, wakes at the
// jittered rise time, optionally rests once during day-time hours, and each
// night enters sleep through exactly one FallingAsleep ramp. Everything is
// drawn in a fixed order from one per-patient engine, so output is
// byte-identical per (profile, seed).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "actinet/core/grammar.hpp"
#include "actinet/core/types.hpp"
#include "actinet/rng.hpp"

namespace actinet {

struct EpochRange {
  int lo = 0;
  int hi = 0;  // inclusive bounds, in epochs
};

struct PatientProfile {
  double wake_mean = 30.0;
  double wake_std = 12.0;
  double sleep_mean = 1.5;
  double sleep_std = 1.2;
  // Probability per Sleep epoch of starting a short movement burst while the
  // label stays Sleep (the restless-sleep hard case).
  double restlessness = 0.02;
  EpochRange falling_duration_range{10, 40};
  double siesta_probability_per_day = 0.5;
  EpochRange siesta_duration_range{30, 120};
  double bed_time = 22.5;   // hours, jittered per night
  double rise_time = 7.0;   // hours, jittered per morning
  double bed_jitter = 0.5;
  double rise_jitter = 0.5;
  // Siesta activity level as a fraction of the wake-sleep span above sleep.
  double siesta_level = 0.15;

  double siesta_mean() const {
    return sleep_mean + siesta_level * (wake_mean - sleep_mean);
  }
  double siesta_std() const {
    return sleep_std + 0.1 * (wake_std - sleep_std);
  }

  void validate(const DaytimeConfig& daytime = {}) const {
    daytime.validate();
    if (!(wake_mean > sleep_mean))
      throw std::invalid_argument("profile: wake_mean must exceed sleep_mean");
    if (sleep_mean < 0.0 || wake_std < 0.0 || sleep_std < 0.0)
      throw std::invalid_argument("profile: means/stds must be non-negative");
    if (restlessness < 0.0 || restlessness > 1.0 ||
        siesta_probability_per_day < 0.0 || siesta_probability_per_day > 1.0)
      throw std::invalid_argument("profile: probabilities must be in [0,1]");
    if (falling_duration_range.lo < 1 ||
        falling_duration_range.hi < falling_duration_range.lo)
      throw std::invalid_argument("profile: bad falling_duration_range");
    if (siesta_duration_range.lo < 1 ||
        siesta_duration_range.hi < siesta_duration_range.lo)
      throw std::invalid_argument("profile: bad siesta_duration_range");
    const double rise_max = rise_time + rise_jitter;
    const double bed_min = bed_time - bed_jitter;
    const double bed_max = bed_time + bed_jitter;
    if (!(0.0 < rise_time - rise_jitter && rise_max < bed_min))
      throw std::invalid_argument("profile: rise window must precede bed window");
    if (!(bed_max * kEpochsPerHour + falling_duration_range.hi + 1 <
          kEpochsPerDay))
      throw std::invalid_argument(
          "profile: falling-asleep ramp must finish before midnight");
    if (!(daytime.day_end <= bed_min))
      throw std::invalid_argument("profile: day-time must end before bed window");
  }
};

struct AttackSchedule {
  std::set<int> attack_days;
  // Probability, per unprotected Sleep epoch on an attack day, of starting an
  // extra Wake interruption.
  double nocturnal_fragmentation = 0.0;
  // Inclusive epoch spans carrying the attack tag; each must start on one of
  // the attack days.
  std::vector<EpochRange> attack_epoch_ranges;
};

namespace detail {

inline int hours_to_epoch(double h) {
  return static_cast<int>(std::lround(h * kEpochsPerHour));
}

// Sleep epochs immediately following a FallingAsleep run must never be
// relabeled, or the F->S adjacency rule breaks.
inline std::vector<bool> protected_epochs(const LabeledSeries& s) {
  std::vector<bool> prot(s.size(), false);
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (*s.epochs[i].state == SleepState::Sleep &&
        *s.epochs[i - 1].state == SleepState::FallingAsleep)
      prot[i] = true;
  }
  return prot;
}

}  // namespace detail

inline LabeledSeries generate_patient_series(const PatientProfile& profile,
                                             int num_days, std::uint64_t seed,
                                             std::string patient_id = "p000",
                                             const DaytimeConfig& daytime = {}) {
  if (num_days < 1)
    throw std::invalid_argument("generate_patient_series: num_days must be >= 1");
  profile.validate(daytime);
  Rng rng(seed);

  const std::size_t n = static_cast<std::size_t>(num_days) * kEpochsPerDay;
  LabeledSeries series;
  series.patient_id = std::move(patient_id);
  series.start_clock = 0;
  series.epochs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    series.epochs[i].timestamp = static_cast<std::int64_t>(i) * kEpochSeconds;
    series.epochs[i].state = SleepState::Wake;
  }

  // Pass 1: schedule rises, beds and falling-asleep ramp lengths.
  std::vector<int> rise(num_days), bed(num_days), fall(num_days);
  for (int d = 0; d < num_days; ++d) {
    rise[d] = detail::hours_to_epoch(
        rng.uniform(profile.rise_time - profile.rise_jitter,
                    profile.rise_time + profile.rise_jitter));
    bed[d] = detail::hours_to_epoch(
        rng.uniform(profile.bed_time - profile.bed_jitter,
                    profile.bed_time + profile.bed_jitter));
    fall[d] = static_cast<int>(rng.uniform_int(profile.falling_duration_range.lo,
                                               profile.falling_duration_range.hi));
  }

  const auto set_state = [&](std::size_t i, SleepState s) {
    if (i < n) series.epochs[i].state = s;
  };

  // Initial morning: the series opens mid-sleep.
  for (int e = 0; e < rise[0]; ++e) set_state(e, SleepState::Sleep);
  // Each day: FallingAsleep ramp at bed time, Sleep until next rise.
  for (int d = 0; d < num_days; ++d) {
    const std::size_t base = static_cast<std::size_t>(d) * kEpochsPerDay;
    const std::size_t f0 = base + static_cast<std::size_t>(bed[d]);
    for (int e = 0; e < fall[d]; ++e) set_state(f0 + e, SleepState::FallingAsleep);
    const std::size_t s0 = f0 + static_cast<std::size_t>(fall[d]);
    const std::size_t s1 =
        (d + 1 < num_days) ? base + kEpochsPerDay + static_cast<std::size_t>(rise[d + 1]) : n;
    for (std::size_t e = s0; e < s1; ++e) set_state(e, SleepState::Sleep);
  }

  // Pass 2: at most one siesta per day, inside day-time and the wake span.
  const int day_start_e = detail::hours_to_epoch(daytime.day_start);
  const int day_end_e = detail::hours_to_epoch(daytime.day_end);
  for (int d = 0; d < num_days; ++d) {
    if (!rng.bernoulli(profile.siesta_probability_per_day)) continue;
    const int dur = static_cast<int>(rng.uniform_int(profile.siesta_duration_range.lo,
                                                     profile.siesta_duration_range.hi));
    const int lo = std::max(rise[d] + 1, day_start_e);
    const int hi = std::min(day_end_e, bed[d] - 1) - dur;  // last legal start
    if (hi < lo) continue;  // no room today
    const int start = static_cast<int>(rng.uniform_int(lo, hi));
    const std::size_t base = static_cast<std::size_t>(d) * kEpochsPerDay;
    for (int e = 0; e < dur; ++e)
      set_state(base + static_cast<std::size_t>(start + e), SleepState::Siesta);
  }

  // Pass 3: activity levels, drawn in epoch order.
  int burst_left = 0;
  std::size_t ramp_start = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Epoch& e = series.epochs[i];
    switch (*e.state) {
      case SleepState::Wake:
        e.activity = rng.truncated_normal_nonneg(profile.wake_mean, profile.wake_std);
        break;
      case SleepState::Siesta:
        e.activity =
            rng.truncated_normal_nonneg(profile.siesta_mean(), profile.siesta_std());
        break;
      case SleepState::Sleep:
        if (burst_left > 0) {
          --burst_left;
          e.activity =
              rng.truncated_normal_nonneg(0.8 * profile.wake_mean, profile.wake_std);
        } else if (rng.bernoulli(profile.restlessness)) {
          burst_left = static_cast<int>(rng.uniform_int(1, 3)) - 1;
          e.activity =
              rng.truncated_normal_nonneg(0.8 * profile.wake_mean, profile.wake_std);
        } else {
          e.activity = rng.truncated_normal_nonneg(profile.sleep_mean, profile.sleep_std);
        }
        break;
      case SleepState::FallingAsleep: {
        if (i == 0 || *series.epochs[i - 1].state != SleepState::FallingAsleep)
          ramp_start = i;
        std::size_t ramp_end = i;
        while (ramp_end + 1 < n &&
               *series.epochs[ramp_end + 1].state == SleepState::FallingAsleep)
          ++ramp_end;
        const double t = static_cast<double>(i - ramp_start + 1) /
                         static_cast<double>(ramp_end - ramp_start + 2);
        const double level = profile.wake_mean + t * (profile.sleep_mean - profile.wake_mean);
        const double spread = profile.sleep_std + (1.0 - t) * (profile.wake_std - profile.sleep_std);
        e.activity = rng.truncated_normal_nonneg(level, spread);
        break;
      }
    }
  }
  return series;
}

// Tags attack spans and fragments sleep on attack days. Only Sleep epochs are
// ever relabeled (to Wake, with activity redrawn at the series' own empirical
// wake level), so the label grammar is preserved.
inline LabeledSeries apply_attack_schedule(const LabeledSeries& series,
                                           const AttackSchedule& schedule,
                                           std::uint64_t seed) {
  if (!series.fully_labeled())
    throw std::invalid_argument("apply_attack_schedule: series is not fully labeled");
  const std::size_t n = series.size();
  const int num_days = static_cast<int>(n / kEpochsPerDay);
  for (const EpochRange& r : schedule.attack_epoch_ranges) {
    if (r.lo < 0 || r.hi >= static_cast<int>(n) || r.lo > r.hi)
      throw std::invalid_argument("apply_attack_schedule: range [" +
                                  std::to_string(r.lo) + "," + std::to_string(r.hi) +
                                  "] out of series bounds");
    if (!schedule.attack_days.count(r.lo / kEpochsPerDay))
      throw std::invalid_argument(
          "apply_attack_schedule: range starting at epoch " + std::to_string(r.lo) +
          " does not start on a scheduled attack day");
  }
  for (int d : schedule.attack_days)
    if (d < 0 || d >= num_days)
      throw std::invalid_argument("apply_attack_schedule: attack day " +
                                  std::to_string(d) + " outside series");
  if (schedule.nocturnal_fragmentation < 0.0 || schedule.nocturnal_fragmentation > 1.0)
    throw std::invalid_argument("apply_attack_schedule: fragmentation not in [0,1]");

  LabeledSeries out = series;
  for (Epoch& e : out.epochs) e.attack = false;

  Rng rng(seed);
  // Empirical wake level of this series, used for awakened epochs.
  double wsum = 0.0, wsq = 0.0;
  std::size_t wn = 0;
  for (const Epoch& e : series.epochs) {
    if (*e.state == SleepState::Wake) {
      wsum += e.activity;
      wsq += e.activity * e.activity;
      ++wn;
    }
  }
  const double wmean = wn ? wsum / static_cast<double>(wn) : 1.0;
  const double wstd = wn ? std::sqrt(std::max(0.0, wsq / static_cast<double>(wn) - wmean * wmean)) : 0.0;

  const std::vector<bool> prot = detail::protected_epochs(series);
  const auto wake_up = [&](std::size_t i) {
    if (*out.epochs[i].state == SleepState::Sleep && !prot[i]) {
      out.epochs[i].state = SleepState::Wake;
      out.epochs[i].activity = rng.truncated_normal_nonneg(wmean, wstd);
    }
  };

  // Attack spans: tag, and wake the patient for their duration.
  for (const EpochRange& r : schedule.attack_epoch_ranges)
    for (int i = r.lo; i <= r.hi; ++i) {
      out.epochs[static_cast<std::size_t>(i)].attack = true;
      wake_up(static_cast<std::size_t>(i));
    }

  // Extra sleep fragmentation on attack days.
  for (int d : schedule.attack_days) {
    const std::size_t lo = static_cast<std::size_t>(d) * kEpochsPerDay;
    const std::size_t hi = std::min(n, lo + kEpochsPerDay);
    for (std::size_t i = lo; i < hi; ++i) {
      if (*out.epochs[i].state != SleepState::Sleep || prot[i]) continue;
      if (!rng.bernoulli(schedule.nocturnal_fragmentation)) continue;
      const int len = static_cast<int>(rng.uniform_int(4, 20));
      for (int k = 0; k < len && i < hi; ++k, ++i) {
        if (*out.epochs[i].state != SleepState::Sleep || prot[i]) break;
        wake_up(i);
      }
    }
  }
  return out;
}

// Draws one nocturnal attack span per attack day: start uniform in the
// configured early-morning window (attacks wake the patient in the middle of
// the night), duration uniform in [duration_lo, duration_hi] epochs, clamped
// to the day block.
inline AttackSchedule make_nocturnal_schedule(int num_days, std::set<int> attack_days,
                                              double fragmentation, std::uint64_t seed,
                                              double start_hour_lo = 1.0,
                                              double start_hour_hi = 4.0,
                                              int duration_lo = 60, int duration_hi = 180) {
  AttackSchedule sched;
  sched.attack_days = std::move(attack_days);
  sched.nocturnal_fragmentation = fragmentation;
  Rng rng(seed);
  for (int d : sched.attack_days) {
    if (d < 0 || d >= num_days)
      throw std::invalid_argument("make_nocturnal_schedule: attack day out of range");
    const int start =
        d * kEpochsPerDay +
        static_cast<int>(rng.uniform_int(detail::hours_to_epoch(start_hour_lo),
                                         detail::hours_to_epoch(start_hour_hi)));
    const int dur = static_cast<int>(rng.uniform_int(duration_lo, duration_hi));
    const int end = std::min(start + dur - 1, (d + 1) * kEpochsPerDay - 1);
    sched.attack_epoch_ranges.push_back({start, end});
  }
  return sched;
}

// One series per profile; per-patient seeds derived from the cohort seed.
// If `schedules` is empty no attacks are applied; otherwise it must align
// with `profiles` by index.
inline std::vector<LabeledSeries> generate_cohort(
    const std::vector<PatientProfile>& profiles,
    const std::vector<AttackSchedule>& schedules, int num_days, std::uint64_t seed,
    const DaytimeConfig& daytime = {}) {
  if (!schedules.empty() && schedules.size() != profiles.size())
    throw std::invalid_argument("generate_cohort: profiles/schedules length mismatch");
  std::vector<LabeledSeries> cohort;
  cohort.reserve(profiles.size());
  for (std::size_t p = 0; p < profiles.size(); ++p) {
    char id[16];
    std::snprintf(id, sizeof(id), "p%03zu", p);
    LabeledSeries s = generate_patient_series(profiles[p], num_days,
                                              derive_seed(seed, p), id, daytime);
    if (!schedules.empty())
      s = apply_attack_schedule(s, schedules[p], derive_seed(seed, p | (1ull << 32)));
    cohort.push_back(std::move(s));
  }
  return cohort;
}

}  // namespace actinet
