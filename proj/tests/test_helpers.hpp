#pragma once

// Shared fixtures for the test suites.

#include <string>
#include <vector>

#include "actinet/core/types.hpp"

namespace testutil {

// Series from a plain activity vector; unlabeled unless states given.
inline actinet::LabeledSeries make_series(const std::vector<double>& activity,
                                          const std::string& pid = "t0",
                                          std::int64_t start_clock = 0) {
  actinet::LabeledSeries s;
  s.patient_id = pid;
  s.start_clock = start_clock;
  for (std::size_t i = 0; i < activity.size(); ++i) {
    actinet::Epoch e;
    e.timestamp = static_cast<std::int64_t>(i) * actinet::kEpochSeconds;
    e.activity = activity[i];
    s.epochs.push_back(e);
  }
  return s;
}

// Labeled series from a state-code string like "WWFFSS" (activity constant).
inline actinet::LabeledSeries make_labeled(const std::string& codes,
                                           const std::string& pid = "t0",
                                           std::int64_t start_clock = 0,
                                           double activity = 1.0) {
  actinet::LabeledSeries s;
  s.patient_id = pid;
  s.start_clock = start_clock;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    actinet::Epoch e;
    e.timestamp = static_cast<std::int64_t>(i) * actinet::kEpochSeconds;
    e.activity = activity;
    e.state = actinet::state_from_code(codes[i]);
    s.epochs.push_back(e);
  }
  return s;
}

}  // namespace testutil
