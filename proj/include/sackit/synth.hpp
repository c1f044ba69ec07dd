#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sackit/types.hpp"

namespace sackit {

/// A labelled sub-population whose saccades are stretched in time by
/// `dilation`. `weight` is its relative share of generated saccades.
struct SynthCategory {
  CategoryLabel label;
  double dilation = 1.0;
  double weight = 1.0;
};

struct SynthConfig {
  // One degree beyond the default model range, so the edge amplitude bins
  // see full windows.
  double amplitude_min = 4.0;
  double amplitude_max = 46.0;
  double rate_hz = 120.0;
  double noise_sigma = 0.1;  // deg, per axis
  double dropout = 0.0369;
  std::vector<SynthCategory> categories = {SynthCategory{}};
  double duration_slope = 2.2;       // ms/deg
  double duration_intercept = 21.0;  // ms
  double tau_fraction = 0.35;
  double shape_exponent = 2.0;
  std::uint64_t seed = 1;

  void validate() const;

  /// Nominal duration T of an undilated saccade of amplitude `alpha`.
  double duration(double alpha) const { return duration_slope * alpha + duration_intercept; }
};

/// Noiseless displacement at t ms after onset: a compressed exponential
/// normalised to reach `alpha` at t = dilation * T and held afterwards.
double template_displacement(const SynthConfig& config, double alpha, double dilation, double t);

struct SaccadeTruth {
  double onset = 0.0;  // ms; stream time for streams, offset of the onset from
                       // the anchor sample for dataset profiles
  double amplitude = 0.0;
  double duration = 0.0;  // dilated duration, ms
  double dilation = 1.0;
  CategoryLabel category;
  Eigen::Vector2d direction = Eigen::Vector2d::UnitX();
};

struct GeneratedCorpus {
  SaccadeDataset dataset;
  std::vector<SaccadeTruth> truth;
};

/// Profiles as the tracker would record them, with detection bypassed: an
/// anchor sample within half a period of the onset, samples at the tracker
/// rate until the first one past the end, Gaussian noise and dropout.
/// Saccade i draws from its own generator seeded by (seed, i).
GeneratedCorpus generate(const SynthConfig& config, std::size_t n);

struct StreamSaccade {
  double amplitude = 10.0;
  Eigen::Vector2d direction = Eigen::Vector2d::UnitX();
  double dilation = 1.0;
  CategoryLabel category;
};

struct SynthStream {
  std::vector<GazeSample> samples;
  std::vector<SaccadeTruth> truth;
};

/// `n` stream saccades with amplitudes, categories and directions drawn as in
/// generate().
std::vector<StreamSaccade> draw_stream_saccades(const SynthConfig& config, std::size_t n);

/// Continuous tracker stream: `fixation_ms` of fixation before each saccade
/// and after the last one. Onsets fall at random phases of the sample clock.
SynthStream generate_stream(const SynthConfig& config, std::span<const StreamSaccade> saccades,
                            double fixation_ms = 500.0);

/// Fixation-only stream of the given length.
std::vector<GazeSample> generate_fixation_stream(const SynthConfig& config, double length_ms);

}  // namespace sackit
