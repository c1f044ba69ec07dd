#include "sackit/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "sackit/detection.hpp"
#include "sackit/error.hpp"

namespace sackit {

void SynthConfig::validate() const {
  if (!(rate_hz > 0.0)) throw StructuralError("synth: rate must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw StructuralError("synth: dropout must be in [0, 1)");
  if (!(noise_sigma >= 0.0)) throw StructuralError("synth: noise sigma must be non-negative");
  if (!(amplitude_min > 0.0) || !(amplitude_max >= amplitude_min)) {
    throw StructuralError("synth: invalid amplitude range");
  }
  if (!(duration_slope >= 0.0) || !(duration_intercept > 0.0) || !(tau_fraction > 0.0) ||
      !(shape_exponent > 0.0)) {
    throw StructuralError("synth: invalid main-sequence or template constants");
  }
  if (categories.empty()) throw StructuralError("synth: no categories");
  for (const auto& c : categories) {
    if (!(c.dilation > 0.0)) throw StructuralError("synth: dilation must be positive");
    if (!(c.weight > 0.0)) throw StructuralError("synth: category weight must be positive");
  }
}

double template_displacement(const SynthConfig& config, double alpha, double dilation, double t) {
  if (t <= 0.0) return 0.0;
  const double T = config.duration(alpha);
  const double u = t / dilation;
  if (u >= T) return alpha;
  const double tau = config.tau_fraction * T;
  const double beta = config.shape_exponent;
  const double norm = 1.0 - std::exp(-std::pow(T / tau, beta));
  return alpha * (1.0 - std::exp(-std::pow(u / tau, beta))) / norm;
}

namespace {

std::mt19937_64 stream_for(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

const SynthCategory& draw_category(const SynthConfig& config, std::mt19937_64& rng) {
  double total = 0.0;
  for (const auto& c : config.categories) total += c.weight;
  double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  for (const auto& c : config.categories) {
    if (u < c.weight) return c;
    u -= c.weight;
  }
  return config.categories.back();
}

Eigen::Vector2d draw_direction(const CategoryLabel& label, std::mt19937_64& rng) {
  const double sign = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
  if (label.factor() == Factor::Orientation) {
    return label.value() == "vertical" ? Eigen::Vector2d(0.0, sign) : Eigen::Vector2d(sign, 0.0);
  }
  const double angle = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
  return {std::cos(angle), std::sin(angle)};
}

}  // namespace

GeneratedCorpus generate(const SynthConfig& config, std::size_t n) {
  config.validate();
  const double period = 1000.0 / config.rate_hz;
  const auto lead_samples = static_cast<int>(std::ceil(30.0 / period - 1e-9));

  GeneratedCorpus out;
  out.dataset.metadata().source = "synthetic";
  out.dataset.metadata().tracker_rate_hz = config.rate_hz;
  out.dataset.reserve(n);
  out.truth.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::mt19937_64 rng = stream_for(config.seed, i);
    const SynthCategory& category = draw_category(config, rng);
    const double alpha =
        std::uniform_real_distribution<double>(config.amplitude_min, config.amplitude_max)(rng);
    const Eigen::Vector2d direction = draw_direction(category.label, rng);
    // Anchor sample sits `phase` ms after the true onset.
    const double phase = std::uniform_real_distribution<double>(-0.5 * period, 0.5 * period)(rng);
    const double duration = category.dilation * config.duration(alpha);
    const auto last = static_cast<int>(std::ceil((duration - phase) / period - 1e-9));

    std::normal_distribution<double> noise(0.0, config.noise_sigma);
    std::bernoulli_distribution drop(config.dropout);
    SaccadeTrace trace;
    trace.direction = direction;
    for (int k = -lead_samples; k <= last; ++k) {
      const double since_onset = phase + k * period;
      const Eigen::Vector2d clean =
          direction * template_displacement(config, alpha, category.dilation, since_onset);
      GazeSample s;
      s.t = 1000.0 + k * period;  // keeps stream time non-negative
      s.x = clean.x() + (config.noise_sigma > 0.0 ? noise(rng) : 0.0);
      s.y = clean.y() + (config.noise_sigma > 0.0 ? noise(rng) : 0.0);
      const bool droppable = k != 0 && k != last;
      s.valid = !(droppable && config.dropout > 0.0 && drop(rng));
      if (k == 0) trace.anchor_index = trace.samples.size();
      trace.samples.push_back(s);
    }
    trace.detection_index = trace.anchor_index;
    out.dataset.add(trace_to_profile(trace, 1.0, category.label));
    out.truth.push_back({-phase, alpha, duration, category.dilation, category.label, direction});
  }
  return out;
}

std::vector<StreamSaccade> draw_stream_saccades(const SynthConfig& config, std::size_t n) {
  config.validate();
  std::vector<StreamSaccade> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::mt19937_64 rng = stream_for(config.seed ^ 0x5eedULL, i);
    const SynthCategory& category = draw_category(config, rng);
    const double alpha =
        std::uniform_real_distribution<double>(config.amplitude_min, config.amplitude_max)(rng);
    out.push_back({alpha, draw_direction(category.label, rng), category.dilation, category.label});
  }
  return out;
}

SynthStream generate_stream(const SynthConfig& config, std::span<const StreamSaccade> saccades,
                            double fixation_ms) {
  config.validate();
  const double period = 1000.0 / config.rate_hz;
  std::mt19937_64 rng = stream_for(config.seed, 0xfeedULL);
  std::uniform_real_distribution<double> jitter(0.0, period);

  struct Event {
    double onset;
    Eigen::Vector2d start;
    const StreamSaccade* saccade;
  };
  std::vector<Event> events;
  SynthStream out;
  double clock = 0.0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  for (const auto& s : saccades) {
    const double onset = clock + fixation_ms + jitter(rng);
    events.push_back({onset, position, &s});
    const double duration = s.dilation * config.duration(s.amplitude);
    out.truth.push_back({onset, s.amplitude, duration, s.dilation, s.category, s.direction.normalized()});
    position += s.direction.normalized() * s.amplitude;
    clock = onset + duration;
  }
  const double length = clock + fixation_ms;

  std::normal_distribution<double> noise(0.0, config.noise_sigma);
  std::bernoulli_distribution drop(config.dropout);
  std::size_t current = 0;
  for (long k = 0;; ++k) {
    const double t = k * period;
    if (t > length + 1e-9) break;
    while (current + 1 < events.size() && events[current + 1].onset <= t) ++current;
    Eigen::Vector2d p = Eigen::Vector2d::Zero();
    if (!events.empty() && events[current].onset <= t) {
      const Event& e = events[current];
      p = e.start + e.saccade->direction.normalized() *
                        template_displacement(config, e.saccade->amplitude, e.saccade->dilation, t - e.onset);
    }
    GazeSample s;
    s.t = t;
    s.x = p.x() + (config.noise_sigma > 0.0 ? noise(rng) : 0.0);
    s.y = p.y() + (config.noise_sigma > 0.0 ? noise(rng) : 0.0);
    s.valid = !(config.dropout > 0.0 && drop(rng));
    out.samples.push_back(s);
  }
  return out;
}

std::vector<GazeSample> generate_fixation_stream(const SynthConfig& config, double length_ms) {
  return generate_stream(config, {}, length_ms).samples;
}

}  // namespace sackit
