#pragma once

// Domain types: 30-second activity epochs, the four-state label space,
// context windows and day vectors.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace actinet {

constexpr std::int64_t kEpochSeconds = 30;
constexpr std::int64_t kSecondsPerDay = 86400;
constexpr int kEpochsPerDay = 2880;   // 24h of 30-second epochs
constexpr int kEpochsPerHour = 120;
constexpr int kWindowContext = 360;   // 3 hours either side of the center
constexpr int kWindowLength = 2 * kWindowContext + 1;  // 721

// Ordinal codes are part of the on-disk and clustering contracts; do not
// reorder.
enum class SleepState : std::uint8_t {
  Wake = 0,
  FallingAsleep = 1,
  Siesta = 2,
  Sleep = 3,
};

constexpr int kNumStates = 4;

inline int ordinal(SleepState s) { return static_cast<int>(s); }

inline SleepState state_from_ordinal(int code) {
  if (code < 0 || code >= kNumStates)
    throw std::invalid_argument("state ordinal out of range: " + std::to_string(code));
  return static_cast<SleepState>(code);
}

// Single-character codes used by the series file format. Siesta is 'Z' to
// keep it distinct from Sleep in single-character form.
inline char state_code(SleepState s) {
  switch (s) {
    case SleepState::Wake: return 'W';
    case SleepState::FallingAsleep: return 'F';
    case SleepState::Siesta: return 'Z';
    case SleepState::Sleep: return 'S';
  }
  return '?';
}

inline std::optional<SleepState> state_from_code(char c) {
  switch (c) {
    case 'W': return SleepState::Wake;
    case 'F': return SleepState::FallingAsleep;
    case 'Z': return SleepState::Siesta;
    case 'S': return SleepState::Sleep;
    default: return std::nullopt;
  }
}

inline const char* state_name(SleepState s) {
  switch (s) {
    case SleepState::Wake: return "Wake";
    case SleepState::FallingAsleep: return "Falling asleep";
    case SleepState::Siesta: return "Siesta";
    case SleepState::Sleep: return "Sleep";
  }
  return "?";
}

struct Epoch {
  std::int64_t timestamp = 0;  // seconds since series start; multiple of 30
  double activity = 0.0;       // non-negative, arbitrary device units
  std::optional<SleepState> state;
  std::optional<bool> attack;
};

// Per-patient sequence of 30-second epochs. Timestamps must advance by
// exactly 30 seconds; series with gaps are rejected at load time.
struct LabeledSeries {
  std::string patient_id;
  std::int64_t start_clock = 0;  // wall-clock second-of-day of the first epoch
  std::vector<Epoch> epochs;

  std::size_t size() const { return epochs.size(); }

  bool fully_labeled() const {
    for (const Epoch& e : epochs)
      if (!e.state) return false;
    return !epochs.empty();
  }

  // Wall-clock second-of-day of epoch i.
  std::int64_t wall_clock(std::size_t i) const {
    return (start_clock + epochs[i].timestamp) % kSecondsPerDay;
  }
};

// Structural invariants shared by the generator and the loader. Throws
// std::invalid_argument naming the first offending epoch.
inline void check_series_structure(const LabeledSeries& s) {
  if (s.start_clock < 0 || s.start_clock >= kSecondsPerDay)
    throw std::invalid_argument("series '" + s.patient_id +
                                "': start_clock outside [0, 86400)");
  bool any_labeled = false, any_unlabeled = false;
  for (std::size_t i = 0; i < s.epochs.size(); ++i) {
    const Epoch& e = s.epochs[i];
    if (e.timestamp != static_cast<std::int64_t>(i) * kEpochSeconds)
      throw std::invalid_argument(
          "series '" + s.patient_id + "': epoch " + std::to_string(i) +
          " timestamp " + std::to_string(e.timestamp) +
          " breaks the 30-second grid");
    if (!(e.activity >= 0.0))
      throw std::invalid_argument("series '" + s.patient_id + "': epoch " +
                                  std::to_string(i) + " has negative activity");
    (e.state ? any_labeled : any_unlabeled) = true;
  }
  if (any_labeled && any_unlabeled)
    throw std::invalid_argument("series '" + s.patient_id +
                                "': labels must be all-or-none");
}

// 721-value activity context centered on the epoch of interest, plus the
// labels the multi-task targets need.
struct WindowSample {
  std::string patient_id;
  std::vector<double> values;             // length 721, center at index 360
  std::size_t center_index = 0;           // position in the source series
  SleepState center_label = SleepState::Wake;
  std::vector<SleepState> window_labels;  // same length as values
};

// One 24-hour block of ordinal state codes, the clustering unit.
struct DayVector {
  std::string patient_id;
  int day_index = 0;
  std::vector<std::uint8_t> states;  // length 2880
  bool has_attack = false;
};

// Wall-clock hours defining "day-time", which bounds where Siesta is legal.
struct DaytimeConfig {
  double day_start = 8.0;
  double day_end = 20.0;

  void validate() const {
    if (!(0.0 <= day_start && day_start < day_end && day_end <= 24.0))
      throw std::invalid_argument("daytime config requires 0 <= start < end <= 24");
  }

  bool contains(std::int64_t wall_clock_s) const {
    const double h = static_cast<double>(wall_clock_s) / 3600.0;
    return day_start <= h && h < day_end;
  }
};

}  // namespace actinet
