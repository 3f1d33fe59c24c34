#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"

#include "gazeintent/attention.hpp"
#include "gazeintent/errors.hpp"

using namespace gazeintent;

namespace {

constexpr double kHz = 75.0;

GazeTrace static_trace(Vec2 pos, double seconds, double t0 = 0.0) {
  AttentionConfig cfg;
  GazeTrace trace(trace_capacity_for(seconds + 1.0, cfg));
  auto n = static_cast<int>(std::lround(seconds * kHz));
  for (int k = 0; k <= n; ++k) trace.push({t0 + k / kHz, pos, true});
  return trace;
}

GazeTrace random_trace(std::uint64_t seed, double seconds, bool with_garbage = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, 40.0);
  std::bernoulli_distribution invalid(0.1);
  AttentionConfig cfg;
  GazeTrace trace(trace_capacity_for(seconds + 1.0, cfg));
  auto n = static_cast<int>(std::lround(seconds * kHz));
  for (int k = 0; k <= n; ++k) {
    GazeSample s{k / kHz, {100.0 + jitter(rng), 50.0 + jitter(rng)}, !invalid(rng)};
    if (with_garbage && k % 17 == 0) s.pos.x = std::numeric_limits<double>::quiet_NaN();
    if (with_garbage && k % 23 == 0) s.pos.y = std::numeric_limits<double>::infinity();
    trace.push(s);
  }
  return trace;
}

}  // namespace

TEST_CASE("gaze_distance") {
  CHECK(gaze_distance({0, 0}, {0, 0}) == 0.0);
  CHECK(gaze_distance({3, 4}, {0, 0}) == 5.0);
  CHECK(gaze_distance({10, 0}, {-10, 0}) == 20.0);
  CHECK(gaze_distance({1, 7}, {-2, 3}) == gaze_distance({-2, 3}, {1, 7}));
}

TEST_CASE("attention_sample matches the Gaussian falloff") {
  CHECK(attention_sample(0.0, 60.0) == 1.0);
  CHECK(std::abs(attention_sample(60.0, 60.0) - 0.60653065971263342) < 1e-12);
  CHECK(std::abs(attention_sample(120.0, 60.0) - 0.13533528323661270) < 1e-12);
  CHECK(std::abs(attention_sample(180.0, 60.0) - 0.011108996538242306) < 1e-12);
  double prev = 2.0;
  for (double d = 0.0; d < 400.0; d += 7.5) {
    double p = attention_sample(d, 60.0);
    CHECK(p < prev);
    CHECK(p > 0.0);
    prev = p;
  }
}

TEST_CASE("attention config validation") {
  AttentionConfig cfg;
  CHECK(cfg.samples_per_window == 300);
  CHECK_NOTHROW(cfg.validate());
  cfg.samples_per_window = 299;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  AttentionConfig bad_sigma;
  bad_sigma.sigma = 0.0;
  CHECK_THROWS_AS(bad_sigma.validate(), ConfigError);
}

TEST_CASE("gaze trace ring buffer evicts oldest first") {
  GazeTrace trace(4);
  for (int k = 0; k < 6; ++k) trace.push({k * 0.1, {static_cast<double>(k), 0}, true});
  CHECK(trace.size() == 4);
  CHECK(trace.front().t == doctest::Approx(0.2));
  CHECK(trace.back().t == doctest::Approx(0.5));
  CHECK(trace[1].pos.x == 3.0);
  CHECK_THROWS_AS(trace.push({0.4, {0, 0}, true}), OutOfOrderError);
  trace.push({0.5, {9, 9}, true});  // equal time is allowed
  CHECK(trace.back().pos.x == 9.0);
}

TEST_CASE("compute_vap on static gaze") {
  AttentionConfig cfg;
  Vec2 obj{100.0, 200.0};

  auto on = static_trace(obj, 5.0);
  auto vap = compute_vap(on, obj, 5.0, cfg);
  REQUIRE(vap.values.size() == 300);
  for (double v : vap.values) CHECK(v == 1.0);
  CHECK(vap.mean() == 1.0);

  auto off = static_trace({160.0, 200.0}, 5.0);
  auto vap60 = compute_vap(off, obj, 5.0, cfg);
  for (double v : vap60.values) CHECK(std::abs(v - std::exp(-0.5)) < 1e-12);

  GazeTrace empty(10);
  CHECK_THROWS_AS((void)compute_vap(empty, obj, 1.0, cfg), EmptyTraceError);
  CHECK_THROWS_AS((void)compute_vap(on, obj, 6.0, cfg), DataError);
}

TEST_CASE("compute_vap: a 0.5 s dropout zeroes the matching slots only") {
  AttentionConfig cfg;
  Vec2 obj{0.0, 0.0};
  GazeTrace trace(1000);
  for (int k = 0; k <= 375; ++k) {
    double t = k / kHz;
    bool dropped = t >= 2.5 && t < 3.0;
    trace.push({t, obj, !dropped});
  }
  auto vap = compute_vap(trace, obj, 5.0, cfg);
  int zeros = 0;
  int first_zero = -1;
  int last_zero = -1;
  for (int i = 0; i < 300; ++i) {
    if (vap.values[i] == 0.0) {
      ++zeros;
      if (first_zero < 0) first_zero = i;
      last_zero = i;
    } else {
      CHECK(vap.values[i] == 1.0);
    }
  }
  // 37/38 invalid frames; the one-frame matching tolerance fills the block edges.
  CHECK(zeros >= 35);
  CHECK(zeros <= 38);
  CHECK(last_zero - first_zero + 1 == zeros);
}

TEST_CASE("property: appending one frame shifts the profile by one slot") {
  AttentionConfig cfg;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto trace = random_trace(seed, 6.0);
    Vec2 obj{120.0, 40.0};
    double end = 5.0;
    auto a = compute_vap(trace, obj, end, cfg);
    auto b = compute_vap(trace, obj, end + cfg.frame, cfg);
    for (int i = 0; i + 1 < 300; ++i) CHECK(b.values[i] == a.values[i + 1]);
    // window_end quantization: nearby ends map to the same grid
    auto c = compute_vap(trace, obj, end + 0.3 * cfg.frame, cfg);
    CHECK(c.values == a.values);
  }
}

TEST_CASE("property: monotone in static gaze distance") {
  AttentionConfig cfg;
  Vec2 obj{0.0, 0.0};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(0.0, 300.0);
  for (int rep = 0; rep < 20; ++rep) {
    double d1 = d(rng);
    double d2 = d(rng);
    if (d1 > d2) std::swap(d1, d2);
    auto near = compute_vap(static_trace({d1, 0.0}, 4.5), obj, 4.5, cfg);
    auto far = compute_vap(static_trace({0.0, d2}, 4.5), obj, 4.5, cfg);
    for (int i = 0; i < 300; ++i) CHECK(near.values[i] >= far.values[i]);
  }
}

TEST_CASE("property: profiles are bounded and NaN-free for arbitrary input") {
  AttentionConfig cfg;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto trace = random_trace(seed, 5.0, true);
    auto vap = compute_vap(trace, {100.0, 50.0}, 4.9, cfg);
    for (double v : vap.values) {
      CHECK(std::isfinite(v));
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(compute_vap(trace, {100.0, 50.0}, 4.9, cfg).values == vap.values);
  }
}

TEST_CASE("parallel multi-object profiles equal the serial reference") {
  AttentionConfig cfg;
  auto layout = standard_layout();
  auto trace = random_trace(17, 6.0);
  std::vector<ObjectId> ids;
  for (int i = 0; i < kStockSlots + kPatternCells; ++i) ids.push_back(i);
  auto par = compute_vaps(trace, ids, layout, 5.5, cfg);
  auto ser = compute_vaps_serial(trace, ids, layout, 5.5, cfg);
  REQUIRE(par.size() == ser.size());
  for (std::size_t i = 0; i < par.size(); ++i) {
    CHECK(par[i].object_id == ids[i]);
    CHECK(par[i].values == ser[i].values);
  }
}

TEST_CASE("attention_series slices agree with compute_vap") {
  AttentionConfig cfg;
  auto trace = random_trace(5, 8.0);
  Vec2 obj{90.0, 10.0};
  auto end = frame_index(7.0, cfg);
  auto series = attention_series(trace, obj, end - 299 - 50, 350, cfg);
  for (int shift = 0; shift <= 50; shift += 10) {
    auto vap = compute_vap(trace, obj, (end - shift) * cfg.frame, cfg);
    std::vector<double> slice(series.begin() + (50 - shift), series.begin() + (50 - shift) + 300);
    CHECK(slice == vap.values);
  }
}

TEST_CASE("gaze record json") {
  GazeSample s{1.25, {3.5, -7.0}, false};
  auto j = gaze_to_json(s);
  CHECK(j.dump() == R"({"t":1.25,"valid":false,"x":3.5,"y":-7.0})");
  CHECK(gaze_from_json(nlohmann::json::parse(j.dump())) == s);
  CHECK_THROWS_AS((void)gaze_from_json(nlohmann::json::parse(R"({"t":1})")), DataError);
}
