#include "sackit/predictor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "sackit/error.hpp"

namespace sackit {

StreamingPredictor::StreamingPredictor(std::shared_ptr<const PredictionModel> model,
                                       PredictorParams params)
    : model_(std::move(model)), params_(params) {
  if (!model_) throw StructuralError("predictor needs a model");
  params_.detection.validate();
}

void StreamingPredictor::reset() {
  history_.clear();
  last_t_ = -1.0;
  phase_ = Phase::Fixation;
  since_anchor_ = 0;
}

std::optional<LandingPrediction> StreamingPredictor::emit(const GazeSample& sample) const {
  if (since_anchor_ <= params_.suppressed_samples) return std::nullopt;
  const Eigen::Vector2d delta = sample.position() - anchor_.position();
  const double d = delta.norm();
  if (d == 0.0) return std::nullopt;
  const AmplitudePrediction p = predict(*model_, sample.t - anchor_.t, d);
  return LandingPrediction{sample.t, anchor_.position() + p.alpha * (delta / d), p.alpha,
                           p.saturated};
}

std::optional<LandingPrediction> StreamingPredictor::feed(const GazeSample& sample) {
  if (sample.t < last_t_) {
    throw StructuralError("out-of-order sample at t = " + std::to_string(sample.t) + " ms");
  }
  last_t_ = sample.t;
  if (!sample.valid) return std::nullopt;
  if (history_.empty()) {
    history_.push(sample);
    return std::nullopt;
  }
  const GazeSample prev = history_.back();
  if (!(sample.t > prev.t)) return std::nullopt;
  const double gap = sample.t - prev.t;
  const double speed = (sample.position() - prev.position()).norm() / gap * 1000.0;
  history_.push(sample);
  const DetectionParams& p = params_.detection;

  if (phase_ == Phase::Fixation) {
    if (gap > p.max_gap || !(speed > p.v_detect)) return std::nullopt;
    // Back-scan over buffered pairs still above the anchor threshold.
    std::size_t j = history_.size() - 2;
    while (j > 0) {
      const GazeSample& a = history_[j - 1];
      const GazeSample& b = history_[j];
      const double g = b.t - a.t;
      if (g > p.max_gap || !((b.position() - a.position()).norm() / g * 1000.0 > p.v_anchor)) break;
      --j;
    }
    anchor_ = history_[j];
    since_anchor_ = history_.size() - 1 - j;
    phase_ = Phase::InSaccade;
    return emit(sample);
  }

  if (gap > p.max_gap) {
    phase_ = Phase::Fixation;
    return std::nullopt;
  }
  ++since_anchor_;
  if (speed < p.v_anchor) phase_ = Phase::Fixation;
  return emit(sample);
}

LatencyStats benchmark_latency(StreamingPredictor& predictor, std::span<const GazeSample> stream,
                               double budget_us) {
  LatencyStats stats;
  stats.budget_us = budget_us;
  stats.samples = stream.size();
  if (stream.empty()) return stats;
  std::vector<double> cost;
  cost.reserve(stream.size());
  for (const auto& s : stream) {
    const auto start = std::chrono::steady_clock::now();
    const auto out = predictor.feed(s);
    const auto stop = std::chrono::steady_clock::now();
    cost.push_back(std::chrono::duration<double, std::micro>(stop - start).count());
    if (out) ++stats.predictions;
  }
  std::sort(cost.begin(), cost.end());
  auto rank = [&](double q) {
    const auto k = static_cast<std::size_t>(std::ceil(q * double(cost.size()))) - 1;
    return cost[std::min(k, cost.size() - 1)];
  };
  stats.p50_us = rank(0.50);
  stats.p99_us = rank(0.99);
  stats.max_us = cost.back();
  stats.within_budget = stats.p99_us <= budget_us;
  return stats;
}

}  // namespace sackit
