#pragma once

// Series file format: UTF-8, LF line endings, mandatory header
//   patient_id,timestamp_s,activity,state,attack
// one epoch per row, rows sorted by (patient_id, timestamp). The timestamp
// column is start_clock + offset, i.e. seconds since midnight of the first
// day, which keeps the wall-clock alignment through a round trip. state is
// W|F|Z|S or empty (all-or-none per patient); attack is 0|1 or empty.

#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "actinet/core/types.hpp"
#include "actinet/io/common.hpp"

namespace actinet::io {

constexpr const char* kSeriesHeader = "patient_id,timestamp_s,activity,state,attack";

inline std::string series_to_csv(const std::vector<LabeledSeries>& cohort) {
  // Sort patients by id so the output satisfies the format's ordering rule.
  std::map<std::string, const LabeledSeries*> by_id;
  for (const LabeledSeries& s : cohort) {
    if (!by_id.emplace(s.patient_id, &s).second)
      throw std::invalid_argument("save_series: duplicate patient id '" +
                                  s.patient_id + "'");
  }
  std::string out = kSeriesHeader;
  out += '\n';
  char buf[64];
  for (const auto& [id, sp] : by_id) {
    const LabeledSeries& s = *sp;
    check_series_structure(s);
    for (const Epoch& e : s.epochs) {
      out += id;
      out += ',';
      std::snprintf(buf, sizeof(buf), "%lld",
                    static_cast<long long>(s.start_clock + e.timestamp));
      out += buf;
      out += ',';
      std::snprintf(buf, sizeof(buf), "%.17g", e.activity);
      out += buf;
      out += ',';
      if (e.state) out += state_code(*e.state);
      out += ',';
      if (e.attack) out += (*e.attack ? '1' : '0');
      out += '\n';
    }
  }
  return out;
}

inline void save_series(const std::vector<LabeledSeries>& cohort,
                        const std::string& path) {
  atomic_write_file(path, series_to_csv(cohort));
}

inline void save_series(const LabeledSeries& series, const std::string& path) {
  save_series(std::vector<LabeledSeries>{series}, path);
}

namespace detail {

[[noreturn]] inline void fail_at(const std::string& path, std::size_t line,
                                 const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace detail

inline std::vector<LabeledSeries> parse_series_csv(const std::string& text,
                                                   const std::string& path = "<memory>") {
  std::vector<LabeledSeries> cohort;
  std::size_t pos = 0, line_no = 0;
  bool saw_header = false;
  std::string prev_patient;
  std::int64_t prev_abs_ts = 0;
  bool series_labeled = false;

  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;

    if (!saw_header) {
      if (line != kSeriesHeader)
        detail::fail_at(path, line_no,
                        "expected header '" + std::string(kSeriesHeader) + "'");
      saw_header = true;
      continue;
    }

    std::vector<std::string> f;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        f.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (f.size() != 5)
      detail::fail_at(path, line_no, "expected 5 fields, got " + std::to_string(f.size()));
    if (f[0].empty()) detail::fail_at(path, line_no, "empty patient_id");

    std::int64_t ts = 0;
    try {
      std::size_t used = 0;
      ts = std::stoll(f[1], &used);
      if (used != f[1].size()) throw std::invalid_argument("");
    } catch (...) {
      detail::fail_at(path, line_no, "bad timestamp '" + f[1] + "'");
    }
    if (ts < 0 || ts % kEpochSeconds != 0)
      detail::fail_at(path, line_no, "timestamp " + f[1] +
                                         " is not a non-negative multiple of 30");

    double activity = 0.0;
    try {
      std::size_t used = 0;
      activity = std::stod(f[2], &used);
      if (used != f[2].size()) throw std::invalid_argument("");
    } catch (...) {
      detail::fail_at(path, line_no, "bad activity '" + f[2] + "'");
    }
    if (!(activity >= 0.0))
      detail::fail_at(path, line_no, "negative activity");

    Epoch e;
    e.activity = activity;
    if (!f[3].empty()) {
      if (f[3].size() != 1) detail::fail_at(path, line_no, "bad state '" + f[3] + "'");
      const auto st = state_from_code(f[3][0]);
      if (!st) detail::fail_at(path, line_no, "unknown state code '" + f[3] + "'");
      e.state = *st;
    }
    if (!f[4].empty()) {
      if (f[4] != "0" && f[4] != "1")
        detail::fail_at(path, line_no, "attack must be 0, 1 or empty");
      e.attack = f[4] == "1";
    }

    if (f[0] != prev_patient) {
      if (!prev_patient.empty() && f[0] < prev_patient)
        detail::fail_at(path, line_no, "rows not sorted by patient_id");
      for (const LabeledSeries& s : cohort)
        if (s.patient_id == f[0])
          detail::fail_at(path, line_no, "patient '" + f[0] + "' appears in two blocks");
      cohort.emplace_back();
      cohort.back().patient_id = f[0];
      cohort.back().start_clock = ts % kSecondsPerDay;
      prev_patient = f[0];
      series_labeled = e.state.has_value();
      // First epoch carries the wall clock; the grid check below needs it.
    } else {
      if (ts != prev_abs_ts + kEpochSeconds)
        detail::fail_at(path, line_no,
                        "timestamp " + f[1] + " breaks the 30-second grid (expected " +
                            std::to_string(prev_abs_ts + kEpochSeconds) + ")");
      if (e.state.has_value() != series_labeled)
        detail::fail_at(path, line_no,
                        "patient '" + f[0] + "' mixes labeled and unlabeled rows");
    }
    prev_abs_ts = ts;
    e.timestamp = ts;  // made relative once the block is complete
    cohort.back().epochs.push_back(e);
  }
  if (!saw_header) detail::fail_at(path, 1, "empty file");

  // Convert absolute timestamps to series-relative offsets.
  for (LabeledSeries& s : cohort) {
    const std::int64_t first = s.epochs.front().timestamp;
    for (Epoch& e : s.epochs) e.timestamp -= first;
    check_series_structure(s);
  }
  return cohort;
}

inline std::vector<LabeledSeries> load_series(const std::string& path) {
  return parse_series_csv(read_file(path), path);
}

}  // namespace actinet::io
