#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>

#include <Eigen/Core>

#include "sackit/detection.hpp"
#include "sackit/model.hpp"
#include "sackit/types.hpp"

namespace sackit {

/// Fixed-capacity FIFO; pushing into a full buffer drops the oldest element.
template <typename T, std::size_t Capacity>
class RingBuffer {
 public:
  void push(const T& value) {
    data_[(head_ + size_) % Capacity] = value;
    if (size_ < Capacity) {
      ++size_;
    } else {
      head_ = (head_ + 1) % Capacity;
    }
  }
  /// Index 0 is the oldest element.
  const T& operator[](std::size_t i) const { return data_[(head_ + i) % Capacity]; }
  const T& back() const { return (*this)[size_ - 1]; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  void clear() { head_ = size_ = 0; }
  static constexpr std::size_t capacity() { return Capacity; }

 private:
  std::array<T, Capacity> data_{};
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

enum class Phase { Fixation, InSaccade };

struct PredictorParams {
  DetectionParams detection;
  // Valid samples after the anchor during which no prediction is emitted.
  std::size_t suppressed_samples = 2;
};

struct LandingPrediction {
  double t = 0.0;
  Eigen::Vector2d landing = Eigen::Vector2d::Zero();
  double alpha = 0.0;
  bool low_confidence = false;
};

/// Online landing-position predictor for one gaze stream. Samples must arrive
/// in time order; state is bounded by the ring buffer.
class StreamingPredictor {
 public:
  // 256 samples cover more than 100 ms up to 2.5 kHz.
  static constexpr std::size_t kHistory = 256;

  explicit StreamingPredictor(std::shared_ptr<const PredictionModel> model,
                              PredictorParams params = {});

  /// Throws StructuralError for a sample older than the previous one.
  std::optional<LandingPrediction> feed(const GazeSample& sample);

  Phase phase() const { return phase_; }
  const GazeSample& anchor() const { return anchor_; }
  void reset();

 private:
  std::optional<LandingPrediction> emit(const GazeSample& sample) const;

  std::shared_ptr<const PredictionModel> model_;
  PredictorParams params_;
  RingBuffer<GazeSample, kHistory> history_;
  double last_t_ = -1.0;
  Phase phase_ = Phase::Fixation;
  GazeSample anchor_;
  std::size_t since_anchor_ = 0;
};

struct LatencyStats {
  std::size_t samples = 0;
  std::size_t predictions = 0;
  double p50_us = 0.0;
  double p99_us = 0.0;
  double max_us = 0.0;
  double budget_us = 200.0;
  bool within_budget = true;  // p99 <= budget
};

/// Wall-clock cost of every feed call over `stream`.
LatencyStats benchmark_latency(StreamingPredictor& predictor, std::span<const GazeSample> stream,
                               double budget_us = 200.0);

}  // namespace sackit
