#include "sackit/detection.hpp"

#include <cmath>

#include "sackit/error.hpp"
#include "sackit/interp.hpp"
#include "sackit/profiles.hpp"

namespace sackit {

void DetectionParams::validate() const {
  if (!(v_anchor > 0.0) || !(v_detect > 0.0) || !(pre_anchor_window >= 0.0) ||
      !(min_amplitude >= 0.0) || !(max_gap > 0.0)) {
    throw StructuralError("detection parameters must be positive");
  }
  if (!(v_anchor < v_detect)) throw StructuralError("v_anchor must be below v_detect");
}

std::optional<double> angular_velocity(const GazeSample& a, const GazeSample& b) {
  const double dt = b.t - a.t;
  if (!(dt > 0.0)) throw StructuralError("angular_velocity: non-increasing time");
  if (!a.valid || !b.valid) return std::nullopt;
  return (b.position() - a.position()).norm() / dt * 1000.0;
}

namespace {

struct Candidate {
  std::size_t first_pair;   // anchor = first sample of this pair
  std::size_t detect_pair;  // detection = second sample of this pair
  std::size_t slow_pair;    // first pair below v_anchor; end = its second sample
};

}  // namespace

std::vector<SaccadeTrace> detect_saccades(std::span<const GazeSample> stream,
                                          const DetectionParams& params) {
  params.validate();

  // Valid samples with strictly increasing time; pair k joins valid[k], valid[k + 1].
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (!stream[i].valid) continue;
    if (!valid.empty() && !(stream[i].t > stream[valid.back()].t)) continue;
    valid.push_back(i);
  }
  if (valid.size() < 3) return {};
  const std::size_t pairs = valid.size() - 1;
  std::vector<double> speed(pairs);
  std::vector<double> gap(pairs);
  for (std::size_t k = 0; k < pairs; ++k) {
    const auto& a = stream[valid[k]];
    const auto& b = stream[valid[k + 1]];
    speed[k] = *angular_velocity(a, b);
    gap[k] = b.t - a.t;
  }

  std::vector<Candidate> candidates;
  std::size_t floor_pair = 0;  // back-scan may not cross into the previous event
  for (std::size_t k = 0; k < pairs;) {
    if (!(speed[k] > params.v_detect)) {
      ++k;
      continue;
    }
    std::size_t j = k;
    while (j > floor_pair && speed[j - 1] > params.v_anchor && gap[j - 1] <= params.max_gap) --j;
    std::size_t m = k;
    while (m < pairs && !(speed[m] < params.v_anchor)) ++m;
    if (m == pairs) break;  // still moving when the stream ends
    if (!candidates.empty() && j <= candidates.back().slow_pair + 1) {
      candidates.back().slow_pair = m;
    } else {
      candidates.push_back({j, k, m});
    }
    floor_pair = m + 1;
    k = m + 1;
  }

  std::vector<SaccadeTrace> traces;
  for (const auto& c : candidates) {
    bool gapped = false;
    for (std::size_t p = c.first_pair; p <= c.slow_pair; ++p) gapped |= gap[p] > params.max_gap;
    if (gapped) continue;

    const std::size_t anchor = valid[c.first_pair];
    const std::size_t detection = valid[c.detect_pair + 1];
    const std::size_t end = valid[c.slow_pair + 1];
    const Eigen::Vector2d delta = stream[end].position() - stream[anchor].position();
    if (delta.norm() < params.min_amplitude || delta.norm() == 0.0) continue;

    std::size_t start = anchor;
    while (start > 0 && stream[start - 1].t >= stream[anchor].t - params.pre_anchor_window) --start;

    SaccadeTrace trace;
    trace.direction = delta.normalized();
    for (std::size_t i = start; i <= end; ++i) {
      if (!trace.samples.empty() && !(stream[i].t > trace.samples.back().t)) continue;
      if (i == anchor) trace.anchor_index = trace.samples.size();
      if (i == detection) trace.detection_index = trace.samples.size();
      trace.samples.push_back(stream[i]);
    }
    traces.push_back(std::move(trace));
  }
  return traces;
}

SaccadeProfile trace_to_profile(const SaccadeTrace& trace, double dt, CategoryLabel category) {
  if (trace.anchor_index >= trace.samples.size() || !trace.anchor().valid) {
    throw StructuralError("trace anchor is missing or invalid");
  }
  const GazeSample& anchor = trace.anchor();
  const Eigen::Vector2d origin = anchor.position();

  std::vector<double> ts;
  std::vector<double> ds;
  for (std::size_t i = trace.anchor_index; i < trace.samples.size(); ++i) {
    const auto& s = trace.samples[i];
    if (!s.valid) continue;
    ts.push_back(s.t - anchor.t);
    ds.push_back((s.position() - origin).dot(trace.direction));
  }
  if (ts.size() < 3) {
    throw StructuralError("trace has " + std::to_string(ts.size()) +
                          " valid samples from anchor to end, need 3");
  }

  SaccadeProfile profile;
  profile.dt = dt;
  profile.category = std::move(category);
  const Eigen::Map<const Eigen::VectorXd> t_map(ts.data(), static_cast<Eigen::Index>(ts.size()));
  const Eigen::Map<const Eigen::VectorXd> d_map(ds.data(), static_cast<Eigen::Index>(ds.size()));
  profile.d = resample(t_map, d_map, dt);
  profile.d[0] = 0.0;
  // An end sample off the grid moves to the next node so the profile keeps
  // the full amplitude.
  if (ts.back() > dt * double(profile.d.size() - 1) + 1e-9) {
    profile.d.conservativeResize(profile.d.size() + 1);
  }
  profile.d[profile.d.size() - 1] = ds.back();

  // Lead context: pre-anchor samples, interpolated at -dt, -2dt, ...
  std::vector<double> lt;
  std::vector<double> ld;
  for (std::size_t i = 0; i < trace.anchor_index; ++i) {
    const auto& s = trace.samples[i];
    if (!s.valid) continue;
    lt.push_back(s.t - anchor.t);
    ld.push_back((s.position() - origin).dot(trace.direction));
  }
  lt.push_back(0.0);
  ld.push_back(0.0);
  const auto steps = static_cast<Eigen::Index>(std::floor(-lt.front() / dt + 1e-9));
  if (steps > 0) {
    const Eigen::Map<const Eigen::VectorXd> x(lt.data(), static_cast<Eigen::Index>(lt.size()));
    const Eigen::Map<const Eigen::VectorXd> y(ld.data(), static_cast<Eigen::Index>(ld.size()));
    const Eigen::VectorXd query = -dt * Eigen::VectorXd::LinSpaced(steps, 1.0, double(steps));
    profile.lead = interp_linear<double>(x, y, query);
  }
  validate(profile);
  return profile;
}

}  // namespace sackit
