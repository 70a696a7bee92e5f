#pragma once

// Label-grammar validation for the four-state space:
//   - every maximal FallingAsleep run starts right after a Wake epoch and
//     ends right before a Sleep epoch (it is a transition state),
//   - every maximal Siesta run is surrounded by Wake on both sides, and
//     falls entirely inside configured day-time hours.

#include <cstddef>
#include <string>
#include <vector>

#include "actinet/core/types.hpp"

namespace actinet {

enum class GrammarViolationKind {
  FallingAsleepNotPrecededByWake,
  FallingAsleepNotFollowedBySleep,
  SiestaNotPrecededByWake,
  SiestaNotFollowedByWake,
  SiestaOutsideDaytime,
};

struct GrammarViolation {
  GrammarViolationKind kind;
  std::size_t position;  // epoch index the violation is reported at
  std::string message;
};

// Empty report iff the series conforms. Daytime breaches are reported once
// per run, at the first offending epoch. Throws if the series is unlabeled.
inline std::vector<GrammarViolation> validate_label_grammar(
    const LabeledSeries& series, const DaytimeConfig& cfg = {}) {
  cfg.validate();
  if (!series.fully_labeled())
    throw std::invalid_argument("validate_label_grammar: series '" +
                                series.patient_id + "' is not fully labeled");
  std::vector<GrammarViolation> report;
  const auto state_at = [&](std::size_t i) { return *series.epochs[i].state; };
  const std::size_t n = series.size();
  std::size_t i = 0;
  while (i < n) {
    const SleepState s = state_at(i);
    std::size_t j = i;
    while (j + 1 < n && state_at(j + 1) == s) ++j;  // run is [i, j]
    if (s == SleepState::FallingAsleep) {
      if (i == 0 || state_at(i - 1) != SleepState::Wake)
        report.push_back({GrammarViolationKind::FallingAsleepNotPrecededByWake, i,
                          "'Falling asleep' run at epoch " + std::to_string(i) +
                              " is not preceded by 'Wake'"});
      if (j + 1 >= n || state_at(j + 1) != SleepState::Sleep)
        report.push_back({GrammarViolationKind::FallingAsleepNotFollowedBySleep, j,
                          "'Falling asleep' run ending at epoch " + std::to_string(j) +
                              " is not followed by 'Sleep'"});
    } else if (s == SleepState::Siesta) {
      if (i == 0 || state_at(i - 1) != SleepState::Wake)
        report.push_back({GrammarViolationKind::SiestaNotPrecededByWake, i,
                          "'Siesta' run at epoch " + std::to_string(i) +
                              " is not preceded by 'Wake'"});
      if (j + 1 >= n || state_at(j + 1) != SleepState::Wake)
        report.push_back({GrammarViolationKind::SiestaNotFollowedByWake, j,
                          "'Siesta' run ending at epoch " + std::to_string(j) +
                              " is not followed by 'Wake'"});
      for (std::size_t k = i; k <= j; ++k) {
        if (!cfg.contains(series.wall_clock(k))) {
          report.push_back({GrammarViolationKind::SiestaOutsideDaytime, k,
                            "'Siesta' epoch " + std::to_string(k) +
                                " falls outside day-time hours"});
          break;
        }
      }
    }
    i = j + 1;
  }
  return report;
}

}  // namespace actinet
