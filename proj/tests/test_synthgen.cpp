#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "actinet/core/grammar.hpp"
#include "actinet/synth/generator.hpp"

using namespace actinet;

namespace {

std::string series_fingerprint(const LabeledSeries& s) {
  std::string fp;
  fp.reserve(s.size() * 12);
  char buf[48];
  for (const Epoch& e : s.epochs) {
    std::snprintf(buf, sizeof(buf), "%c%.17g;", state_code(*e.state), e.activity);
    fp += buf;
  }
  return fp;
}

std::map<SleepState, std::pair<double, std::size_t>> mean_by_state(
    const LabeledSeries& s) {
  std::map<SleepState, std::pair<double, std::size_t>> acc;
  for (const Epoch& e : s.epochs) {
    acc[*e.state].first += e.activity;
    acc[*e.state].second += 1;
  }
  return acc;
}

}  // namespace

TEST_CASE("generated series basics") {
  const PatientProfile profile;
  SECTION("one day yields 2880 epochs, fully labeled, grid-aligned") {
    const auto s = generate_patient_series(profile, 1, 42);
    REQUIRE(s.size() == 2880);
    CHECK(s.fully_labeled());
    check_series_structure(s);
  }
  SECTION("same profile and seed give byte-identical series") {
    const auto a = generate_patient_series(profile, 3, 9);
    const auto b = generate_patient_series(profile, 3, 9);
    CHECK(series_fingerprint(a) == series_fingerprint(b));
  }
  SECTION("different seeds differ") {
    const auto a = generate_patient_series(profile, 2, 1);
    const auto b = generate_patient_series(profile, 2, 2);
    CHECK(series_fingerprint(a) != series_fingerprint(b));
  }
  SECTION("zero siesta probability produces no siesta over 100 days") {
    PatientProfile p = profile;
    p.siesta_probability_per_day = 0.0;
    const auto s = generate_patient_series(p, 100, 5);
    for (const Epoch& e : s.epochs) CHECK(*e.state != SleepState::Siesta);
  }
  SECTION("degenerate profile is rejected") {
    PatientProfile p = profile;
    p.wake_mean = p.sleep_mean;
    CHECK_THROWS_AS(generate_patient_series(p, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(generate_patient_series(profile, 0, 0), std::invalid_argument);
  }
}

TEST_CASE("generated series pass the label grammar across seeds") {
  const PatientProfile profile;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto s = generate_patient_series(profile, 2, seed);
    const auto report = validate_label_grammar(s);
    INFO("seed " << seed);
    CHECK(report.empty());
  }
}

TEST_CASE("each night has exactly one falling-asleep run into sleep") {
  const PatientProfile profile;
  const int days = 5;
  const auto s = generate_patient_series(profile, days, 77);
  int runs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (*s.epochs[i].state == SleepState::FallingAsleep &&
        (i == 0 || *s.epochs[i - 1].state != SleepState::FallingAsleep)) {
      ++runs;
      const int dur = profile.falling_duration_range.hi;
      std::size_t j = i;
      while (j + 1 < s.size() && *s.epochs[j + 1].state == SleepState::FallingAsleep) ++j;
      CHECK(static_cast<int>(j - i + 1) >= profile.falling_duration_range.lo);
      CHECK(static_cast<int>(j - i + 1) <= dur);
    }
  }
  CHECK(runs == days);
}

TEST_CASE("activity levels order as sleep < siesta < wake") {
  PatientProfile profile;
  profile.siesta_probability_per_day = 1.0;
  for (std::uint64_t seed = 100; seed < 112; ++seed) {
    const auto s = generate_patient_series(profile, 3, seed);
    auto acc = mean_by_state(s);
    const double sleep = acc[SleepState::Sleep].first / acc[SleepState::Sleep].second;
    const double wake = acc[SleepState::Wake].first / acc[SleepState::Wake].second;
    REQUIRE(acc[SleepState::Siesta].second > 0);
    const double siesta = acc[SleepState::Siesta].first / acc[SleepState::Siesta].second;
    const double falling =
        acc[SleepState::FallingAsleep].first / acc[SleepState::FallingAsleep].second;
    INFO("seed " << seed);
    CHECK(sleep < siesta);
    CHECK(siesta < wake);
    CHECK(sleep < falling);
    CHECK(falling < wake);
  }
}

TEST_CASE("attack schedules") {
  const PatientProfile profile;
  const auto base = generate_patient_series(profile, 3, 11);

  SECTION("empty schedule tags nothing and changes nothing else") {
    const auto out = apply_attack_schedule(base, AttackSchedule{}, 1);
    REQUIRE(out.size() == base.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(*out.epochs[i].attack == false);
      CHECK(out.epochs[i].activity == base.epochs[i].activity);
      CHECK(*out.epochs[i].state == *base.epochs[i].state);
    }
  }
  SECTION("a range of epochs 100..120 tags exactly 21 epochs") {
    AttackSchedule sched;
    sched.attack_days = {0};
    sched.attack_epoch_ranges = {{100, 120}};
    const auto out = apply_attack_schedule(base, sched, 1);
    std::size_t tagged = 0;
    for (const Epoch& e : out.epochs) tagged += *e.attack ? 1 : 0;
    CHECK(tagged == 21);
  }
  SECTION("tagging preserves epoch count, timestamps and the grammar") {
    const auto sched = make_nocturnal_schedule(3, {0, 2}, 0.01, 5);
    const auto out = apply_attack_schedule(base, sched, 1);
    REQUIRE(out.size() == base.size());
    for (std::size_t i = 0; i < out.size(); ++i)
      CHECK(out.epochs[i].timestamp == base.epochs[i].timestamp);
    CHECK(validate_label_grammar(out).empty());
  }
  SECTION("full fragmentation strictly increases wake on the attack day") {
    AttackSchedule frag = make_nocturnal_schedule(3, {1}, 1.0, 5);
    AttackSchedule none = frag;
    none.nocturnal_fragmentation = 0.0;
    const auto with = apply_attack_schedule(base, frag, 9);
    const auto without = apply_attack_schedule(base, none, 9);
    const auto wake_in_day = [](const LabeledSeries& s, int day) {
      std::size_t n = 0;
      for (int i = day * kEpochsPerDay; i < (day + 1) * kEpochsPerDay; ++i)
        n += *s.epochs[i].state == SleepState::Wake ? 1 : 0;
      return n;
    };
    CHECK(wake_in_day(with, 1) > wake_in_day(without, 1));
    CHECK(validate_label_grammar(with).empty());
  }
  SECTION("out-of-bounds and misaligned ranges are rejected") {
    AttackSchedule sched;
    sched.attack_days = {0};
    sched.attack_epoch_ranges = {{-1, 5}};
    CHECK_THROWS_AS(apply_attack_schedule(base, sched, 1), std::invalid_argument);
    sched.attack_epoch_ranges = {{0, static_cast<int>(base.size())}};
    CHECK_THROWS_AS(apply_attack_schedule(base, sched, 1), std::invalid_argument);
    // Range starting on a day that is not scheduled.
    sched.attack_epoch_ranges = {{kEpochsPerDay + 10, kEpochsPerDay + 20}};
    CHECK_THROWS_AS(apply_attack_schedule(base, sched, 1), std::invalid_argument);
  }
}

TEST_CASE("cohort generation") {
  const std::vector<PatientProfile> profiles(2);
  SECTION("distinct patient ids, deterministic output") {
    const auto a = generate_cohort(profiles, {}, 2, 7);
    const auto b = generate_cohort(profiles, {}, 2, 7);
    REQUIRE(a.size() == 2);
    CHECK(a[0].patient_id != a[1].patient_id);
    for (std::size_t p = 0; p < a.size(); ++p)
      CHECK(series_fingerprint(a[p]) == series_fingerprint(b[p]));
  }
  SECTION("schedule list must align with profiles") {
    CHECK_THROWS_AS(generate_cohort(profiles, std::vector<AttackSchedule>(1), 1, 0),
                    std::invalid_argument);
  }
  SECTION("cohort scale arithmetic: days times 2880 epochs") {
    const auto c = generate_cohort(std::vector<PatientProfile>(2), {}, 84, 3);
    for (const auto& s : c) CHECK(s.size() == 84u * 2880u);
  }
}
