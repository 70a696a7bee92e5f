#include <catch2/catch_amalgamated.hpp>

#include "actinet/core/series_ops.hpp"
#include "actinet/rng.hpp"
#include "test_helpers.hpp"

using namespace actinet;
using testutil::make_labeled;
using testutil::make_series;

TEST_CASE("smooth_series fixed points and hand-evaluated averages") {
  CHECK_THROWS_AS(smooth_series(make_series({}), 1), std::invalid_argument);
  CHECK_THROWS_AS(smooth_series(make_series({1.0}), -1), std::invalid_argument);

  // Zero and constant signals are fixed points.
  const auto zeros = smooth_series(make_series({0, 0, 0}), 1);
  for (const Epoch& e : zeros.epochs) CHECK(e.activity == 0.0);
  const auto threes = smooth_series(make_series({3, 3, 3, 3}), 1);
  for (const Epoch& e : threes.epochs) CHECK(e.activity == 3.0);

  // Edge-truncated windows: (0+6)/2, (0+6+0)/3, (6+0)/2.
  const auto spiky = smooth_series(make_series({0, 6, 0}), 1);
  CHECK(spiky.epochs[0].activity == Catch::Approx(3.0));
  CHECK(spiky.epochs[1].activity == Catch::Approx(2.0));
  CHECK(spiky.epochs[2].activity == Catch::Approx(3.0));

  // Length, labels and timestamps unchanged; constant mean preserved.
  LabeledSeries lab = make_labeled("WWWSSS");
  lab.epochs[2].activity = 5.0;
  const auto sm = smooth_series(lab, 2);
  REQUIRE(sm.size() == lab.size());
  for (std::size_t i = 0; i < sm.size(); ++i) {
    CHECK(sm.epochs[i].timestamp == lab.epochs[i].timestamp);
    CHECK(sm.epochs[i].state == lab.epochs[i].state);
  }
}

TEST_CASE("extract_windows boundary arithmetic") {
  const auto mk = [](std::size_t n) {
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = static_cast<double>(i);
    return make_series(a);
  };

  SECTION("len 1000, stride 1: 280 samples, centers 360..639") {
    const auto w = extract_windows(mk(1000), 360, 1);
    REQUIRE(w.size() == 280);
    CHECK(w.front().center_index == 360);
    CHECK(w.back().center_index == 639);
  }
  SECTION("len 721: exactly one sample at 360") {
    const auto w = extract_windows(mk(721), 360, 1);
    REQUIRE(w.size() == 1);
    CHECK(w[0].center_index == 360);
    CHECK(w[0].values.size() == 721);
  }
  SECTION("len 1000, stride 10: 28 samples (brute-force count)") {
    const auto w = extract_windows(mk(1000), 360, 10);
    std::size_t expected = 0;
    for (std::size_t c = 360; c + 360 < 1000; c += 10) ++expected;
    CHECK(w.size() == expected);
    CHECK(w.size() == 28);
  }
  SECTION("too short series names the required minimum") {
    try {
      extract_windows(mk(720), 360, 1);
      FAIL("expected error");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("721") != std::string::npos);
    }
  }
}

TEST_CASE("extract_windows count matches ceil((len-2c)/stride) and slices are exact") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int context = static_cast<int>(rng.uniform_int(0, 12));
    const int len = static_cast<int>(rng.uniform_int(2 * context + 1, 2 * context + 120));
    const int stride = static_cast<int>(rng.uniform_int(1, 11));
    std::vector<double> a(len);
    for (double& v : a) v = rng.uniform(0, 10);
    const auto w = extract_windows(make_series(a), context, stride);

    // Brute-force enumeration of valid centers.
    std::vector<int> centers;
    for (int c = context; c + context < len; c += stride) centers.push_back(c);
    REQUIRE(w.size() == centers.size());
    const auto formula = static_cast<std::size_t>(
        std::max<std::int64_t>(0, (len - 2 * context + stride - 1) / stride));
    CHECK(w.size() == formula);

    // Values equal the exact slice of the source.
    for (std::size_t s = 0; s < w.size(); ++s) {
      CHECK(w[s].center_index == static_cast<std::size_t>(centers[s]));
      for (int k = 0; k < 2 * context + 1; ++k)
        REQUIRE(w[s].values[k] == a[centers[s] - context + k]);
    }
  }
}

TEST_CASE("split_train_test block split per patient") {
  std::vector<WindowSample> samples;
  for (int i = 0; i < 100; ++i) {
    WindowSample s;
    s.patient_id = "a";
    s.center_index = i;
    samples.push_back(s);
  }
  SECTION("100 samples at 0.8 give 80/20") {
    const auto [train, test] = split_train_test(samples, 0.8, 1);
    CHECK(train.size() == 80);
    CHECK(test.size() == 20);
    // Contiguous block: all train centers precede all test centers.
    CHECK(train.back().center_index < test.front().center_index);
  }
  SECTION("single sample resolves to (1,0) by the rounding rule") {
    const auto [train, test] = split_train_test({samples[0]}, 0.8, 1);
    CHECK(train.size() == 1);
    CHECK(test.empty());
  }
  SECTION("same seed twice gives identical partitions") {
    const auto [t1, e1] = split_train_test(samples, 0.8, 7);
    const auto [t2, e2] = split_train_test(samples, 0.8, 7);
    REQUIRE(t1.size() == t2.size());
    for (std::size_t i = 0; i < t1.size(); ++i)
      CHECK(t1[i].center_index == t2[i].center_index);
  }
  SECTION("degenerate inputs") {
    CHECK_THROWS_AS(split_train_test({}, 0.8, 1), std::invalid_argument);
    CHECK_THROWS_AS(split_train_test(samples, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(split_train_test(samples, 1.0, 1), std::invalid_argument);
  }
  SECTION("per-patient fractions") {
    std::vector<WindowSample> two = samples;
    for (int i = 0; i < 50; ++i) {
      WindowSample s;
      s.patient_id = "b";
      s.center_index = i;
      two.push_back(s);
    }
    const auto [train, test] = split_train_test(two, 0.8, 1);
    CHECK(train.size() == 80 + 40);
    CHECK(test.size() == 20 + 10);
  }
}

TEST_CASE("partition_days blocks and attack propagation") {
  const auto mk_labeled_n = [](std::size_t n) {
    std::vector<double> a(n, 1.0);
    LabeledSeries s = make_series(a);
    for (Epoch& e : s.epochs) e.state = SleepState::Wake;
    return s;
  };

  SECTION("5760 epochs give two days") {
    const auto days = partition_days(mk_labeled_n(5760));
    REQUIRE(days.size() == 2);
    CHECK(days[0].day_index == 0);
    CHECK(days[1].day_index == 1);
  }
  SECTION("6000 epochs drop the 240-epoch tail") {
    CHECK(partition_days(mk_labeled_n(6000)).size() == 2);
  }
  SECTION("short series give an empty list, not an error") {
    CHECK(partition_days(mk_labeled_n(2879)).empty());
  }
  SECTION("unlabeled series are rejected") {
    CHECK_THROWS_AS(partition_days(make_series({1, 2, 3})), std::invalid_argument);
  }
  SECTION("any attack epoch marks the day") {
    LabeledSeries s = mk_labeled_n(5760);
    s.epochs[3000].attack = true;
    const auto days = partition_days(s);
    CHECK_FALSE(days[0].has_attack);
    CHECK(days[1].has_attack);
  }
  SECTION("blocks are disjoint, ordered, and reconstruct the prefix") {
    LabeledSeries s = mk_labeled_n(6000);
    for (std::size_t i = 0; i < s.size(); ++i)
      s.epochs[i].state = static_cast<SleepState>(i % 4);
    const auto days = partition_days(s);
    REQUIRE(days.size() == 2);
    std::size_t pos = 0;
    for (const DayVector& d : days) {
      REQUIRE(d.states.size() == static_cast<std::size_t>(kEpochsPerDay));
      for (std::uint8_t st : d.states) {
        REQUIRE(static_cast<int>(st) == ordinal(*s.epochs[pos].state));
        ++pos;
      }
    }
    CHECK(pos == 2 * static_cast<std::size_t>(kEpochsPerDay));
  }
}
