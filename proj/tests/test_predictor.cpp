#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "sackit/error.hpp"
#include "sackit/predictor.hpp"
#include "sackit/synth.hpp"

using namespace sackit;

namespace {

std::shared_ptr<const PredictionModel> shared_model() {
  static const auto model = [] {
    auto cfg = testing::noiseless();
    cfg.seed = 2;
    return std::make_shared<const PredictionModel>(build_model(generate(cfg, 2000).dataset));
  }();
  return model;
}

std::vector<LandingPrediction> run(StreamingPredictor& p, std::span<const GazeSample> stream) {
  std::vector<LandingPrediction> out;
  for (const auto& s : stream) {
    if (auto pred = p.feed(s)) out.push_back(*pred);
  }
  return out;
}

}  // namespace

TEST_CASE("ring buffer keeps the newest elements in order") {
  RingBuffer<int, 4> rb;
  CHECK(rb.empty());
  for (int i = 0; i < 3; ++i) rb.push(i);
  CHECK(rb.size() == 3);
  CHECK(rb[0] == 0);
  CHECK(rb.back() == 2);
  for (int i = 3; i < 10; ++i) rb.push(i);
  CHECK(rb.size() == 4);
  CHECK(rb[0] == 6);
  CHECK(rb[3] == 9);
  rb.clear();
  CHECK(rb.empty());
  CHECK(RingBuffer<int, 4>::capacity() == 4);
}

TEST_CASE("fixation produces no predictions") {
  StreamingPredictor p(shared_model());
  SynthConfig cfg;
  const auto stream = generate_fixation_stream(cfg, 5000.0);
  CHECK(run(p, stream).empty());
  CHECK(p.phase() == Phase::Fixation);
}

TEST_CASE("noiseless 20 degree saccade lands on target") {
  auto cfg = testing::noiseless();
  const Eigen::Vector2d dir = Eigen::Vector2d(1.0, -1.0).normalized();
  const std::vector<StreamSaccade> sac = {{20.0, dir, 1.0, {}}};
  const auto s = generate_stream(cfg, sac);
  StreamingPredictor p(shared_model());
  const auto preds = run(p, s.samples);
  REQUIRE(preds.size() >= 3);
  CHECK(std::abs(preds.back().alpha - 20.0) <= 0.5);
  const Eigen::Vector2d start = s.samples.front().position();
  const Eigen::Vector2d landing = s.samples.back().position();
  CHECK((landing - start - 20.0 * dir).norm() <= 1e-9);
  CHECK((preds.back().landing - landing).norm() <= 0.5);
  CHECK(std::abs(p.anchor().t - s.truth[0].onset) <= 1000.0 / cfg.rate_hz);
  for (const auto& pr : preds) {
    CHECK(pr.t > s.truth[0].onset);
    CHECK(pr.t <= s.truth[0].onset + s.truth[0].duration + 2000.0 / cfg.rate_hz);
  }
}

TEST_CASE("errors shrink as the saccade unfolds") {
  auto cfg = testing::noiseless();
  cfg.rate_hz = 500.0;
  std::vector<StreamSaccade> sac;
  for (double a : {12.0, 18.0, 26.0, 33.0, 41.0}) sac.push_back({a, Eigen::Vector2d::UnitX(), 1.0, {}});
  const auto s = generate_stream(cfg, sac, 300.0);
  std::vector<double> at20;
  std::vector<double> at50;
  StreamingPredictor p(shared_model());
  for (const auto& x : s.samples) {
    const auto pred = p.feed(x);
    if (!pred) continue;
    for (const auto& tr : s.truth) {
      const double frac = (pred->t - tr.onset) / tr.duration;
      if (frac < 0.0 || frac > 1.2) continue;
      const double err = std::abs(pred->alpha - tr.amplitude);
      if (std::abs(frac - 0.2) < 0.02) at20.push_back(err);
      if (std::abs(frac - 0.5) < 0.02) at50.push_back(err);
    }
  }
  REQUIRE(!at20.empty());
  REQUIRE(!at50.empty());
  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  CHECK(median(at50) <= median(at20));
}

TEST_CASE("out-of-order samples are rejected, invalid samples are skipped") {
  StreamingPredictor p(shared_model());
  CHECK_FALSE(p.feed({10.0, 0.0, 0.0, true}));
  CHECK_THROWS_AS(p.feed({9.0, 0.0, 0.0, true}), StructuralError);
  CHECK_FALSE(p.feed({20.0, 50.0, 0.0, false}));
  CHECK_FALSE(p.feed({20.0, 0.0, 0.0, true}));
  CHECK_THROWS_AS(StreamingPredictor(nullptr), StructuralError);
}

TEST_CASE("predictions depend only on the past and repeat exactly") {
  SynthConfig cfg;
  cfg.seed = 12;
  const auto sac = draw_stream_saccades(cfg, 8);
  const auto s = generate_stream(cfg, sac);
  StreamingPredictor full(shared_model());
  const auto all = run(full, s.samples);
  REQUIRE(!all.empty());

  for (std::size_t cut : {s.samples.size() / 3, s.samples.size() / 2, s.samples.size() - 1}) {
    StreamingPredictor prefix(shared_model());
    const auto part = run(prefix, std::span(s.samples).first(cut));
    std::size_t expected = 0;
    while (expected < all.size() && all[expected].t <= s.samples[cut - 1].t) ++expected;
    REQUIRE(part.size() == expected);
    for (std::size_t i = 0; i < part.size(); ++i) {
      CHECK(part[i].t == all[i].t);
      CHECK(part[i].alpha == all[i].alpha);
      CHECK(part[i].landing == all[i].landing);
    }
  }

  full.reset();
  const auto again = run(full, s.samples);
  REQUIRE(again.size() == all.size());
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(again[i].alpha == all[i].alpha);
}

TEST_CASE("long streams keep bounded state") {
  SynthConfig cfg;
  cfg.rate_hz = 1000.0;
  const auto stream = generate_fixation_stream(cfg, 2000.0);
  StreamingPredictor p(shared_model());
  run(p, stream);
  CHECK(sizeof(StreamingPredictor) < 64 * 1024);
  CHECK(StreamingPredictor::kHistory == 256);
}

TEST_CASE("latency statistics") {
  StreamingPredictor p(shared_model());
  const auto empty = benchmark_latency(p, std::span<const GazeSample>{});
  CHECK(empty.samples == 0);
  CHECK(empty.within_budget);

  SynthConfig cfg;
  const auto s = generate_stream(cfg, draw_stream_saccades(cfg, 5));
  StreamingPredictor q(shared_model());
  const auto expected = run(q, s.samples).size();
  p.reset();
  const auto stats = benchmark_latency(p, s.samples, 150.0);
  CHECK(stats.samples == s.samples.size());
  CHECK(stats.predictions == expected);
  CHECK(stats.budget_us == 150.0);
  CHECK(stats.p50_us <= stats.p99_us);
  CHECK(stats.p99_us <= stats.max_us);
}
