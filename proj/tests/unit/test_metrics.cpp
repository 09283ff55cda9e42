#include "doctest.h"

#include "jamwatch/errors.hpp"
#include "jamwatch/metrics.hpp"

#include <random>
#include <vector>

using namespace jamwatch;

namespace {

GroundTruth two_intervals() { return GroundTruth{JammingSchedule({{10, 40, 0}, {70, 100, 5}}), 1.0}; }

std::vector<FlagSample> stream(int n, auto pred) {
  std::vector<FlagSample> f;
  for (int t = 0; t < n; ++t)
    f.push_back({double(t), pred(t)});
  return f;
}

} // namespace

TEST_SUITE("metrics") {

TEST_CASE("hand-counted confusion") {
  const auto flags = stream(110, [](int t) { return (t >= 12 && t < 40) || t == 55; });
  const auto r = evaluate(flags, two_intervals());
  CHECK(r.confusion.tp == 28);
  CHECK(r.confusion.fn == 32);
  CHECK(r.confusion.fp == 1);
  CHECK(r.confusion.tn == 49);
  CHECK(r.intervals_detected == 1);
  CHECK(r.intervals_total == 2);
  CHECK(r.interval_detected == std::vector<bool>{true, false});
  CHECK(r.detection_probability == doctest::Approx(28.0 / 60.0));
  CHECK(r.false_alarm_rate == doctest::Approx(1.0 / 29.0));
  CHECK(r.false_alarm_density == doctest::Approx(1.0 / 50.0));
  CHECK(r.missed_detection_rate == doctest::Approx(2.0 / 60.0));
  CHECK(r.epoch_miss_rate == doctest::Approx(32.0 / 60.0));
  CHECK(r.false_alarm_times == std::vector<double>{55.0});
}

TEST_CASE("perfect and silent detectors") {
  const auto truth = two_intervals();
  const auto perfect = evaluate(stream(110, [&](int t) { return truth.intervals.interval_at(t).has_value(); }), truth);
  CHECK(perfect.detection_probability == 1.0);
  CHECK(perfect.false_alarm_rate == 0.0);
  CHECK(perfect.intervals_detected == 2);

  const auto silent = evaluate(stream(110, [](int) { return false; }), truth);
  CHECK(silent.detection_probability == 0.0);
  CHECK(silent.false_alarm_rate == 0.0);
  CHECK(silent.intervals_detected == 0);

  const auto none = evaluate(std::vector<FlagSample>{}, truth);
  CHECK(none.detection_probability == 0.0);
  CHECK(none.intervals_detected == 0);
}

TEST_CASE("guard band drops recovery epochs from scoring") {
  const auto flags = stream(110, [](int t) { return (t >= 10 && t < 43) || t == 55; });
  const auto bare = evaluate(flags, two_intervals(), 0.0);
  CHECK(bare.confusion.fp == 4);
  const auto guarded = evaluate(flags, two_intervals(), 5.0);
  CHECK(guarded.confusion.fp == 1);
  CHECK(guarded.excluded_epochs == 20);
  CHECK(guarded.confusion.total() + guarded.excluded_epochs == 110);
}

TEST_CASE("partition and monotonicity on random streams") {
  std::mt19937_64 rng(12);
  std::bernoulli_distribution coin(0.3);
  const auto truth = two_intervals();
  for (int trial = 0; trial < 200; ++trial) {
    auto flags = stream(120, [&](int) { return coin(rng); });
    const auto r = evaluate(flags, truth);
    REQUIRE(r.confusion.total() == flags.size());

    const auto idx = std::uniform_int_distribution<std::size_t>(0, flags.size() - 1)(rng);
    if (flags[idx].flag)
      continue;
    flags[idx].flag = true;
    const auto after = evaluate(flags, truth);
    if (truth.intervals.interval_at(flags[idx].t)) {
      REQUIRE(after.detection_probability >= r.detection_probability);
      REQUIRE(after.intervals_detected >= r.intervals_detected);
    } else {
      REQUIRE(after.confusion.fp == r.confusion.fp + 1);
    }
  }
}

TEST_CASE("flag order is enforced") {
  std::vector<FlagSample> bad{{1.0, false}, {1.0, true}};
  CHECK_THROWS_AS(evaluate(bad, two_intervals()), UnsortedFlags);
  CHECK_THROWS_AS(evaluate(std::vector<FlagSample>{}, GroundTruth{}), InvalidArgument);
}

TEST_CASE("comparison table") {
  const auto truth = two_intervals();
  const auto a = evaluate(stream(110, [&](int t) { return truth.intervals.interval_at(t).has_value(); }), truth);
  const auto b = evaluate(stream(110, [](int t) { return (t >= 12 && t < 40) || t == 55; }), truth);

  const auto same = compare(a, a);
  REQUIRE(same.rows.size() == 4);
  CHECK(same.rows[0].delta == "+0");
  for (std::size_t k = 1; k < 4; ++k)
    CHECK(same.rows[k].delta == "+0.0 pp");

  const auto t = compare(a, b);
  CHECK(t.rows[0].label == "Interference detected intervals");
  CHECK(t.rows[0].a == "2/2");
  CHECK(t.rows[0].b == "1/2");
  CHECK(t.rows[1].a == "100.0%");
  CHECK(t.rows[1].b == "46.7%");
  CHECK(t.rows[3].b == "3.4%");
  const auto text = t.render();
  CHECK(text.find("AGC-based detector") != std::string::npos);
  CHECK(text.find("False alarm rate") != std::string::npos);

  const auto other = evaluate(stream(110, [](int) { return false; }), GroundTruth{JammingSchedule({{10, 40, 0}}), 1.0});
  CHECK_THROWS_AS(compare(a, other), TruthMismatch);
}

}
