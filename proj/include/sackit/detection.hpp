#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sackit/types.hpp"

namespace sackit {

struct DetectionParams {
  double v_detect = 180.0;          // deg/s
  double v_anchor = 90.0;           // deg/s
  double pre_anchor_window = 30.0;  // ms
  double min_amplitude = 1.0;       // deg
  double max_gap = 20.0;            // ms

  /// Throws StructuralError unless 0 < v_anchor < v_detect and all positive.
  void validate() const;
};

/// Angular speed in deg/s between two samples, no filtering. Returns nullopt
/// when either sample is invalid; throws StructuralError when b.t <= a.t.
std::optional<double> angular_velocity(const GazeSample& a, const GazeSample& b);

/// Double-threshold detection: a pair above v_detect marks the detection, the
/// back-scan over pairs above v_anchor finds the anchor, and the saccade ends
/// with the first forward pair below v_anchor (its later sample included).
/// Invalid stretches longer than max_gap inside a candidate reject it.
std::vector<SaccadeTrace> detect_saccades(std::span<const GazeSample> stream,
                                          const DetectionParams& params = {});

/// Converts a trace to a profile sampled every `dt` ms: t = 0 at the anchor,
/// displacement projected on the trace direction, pre-anchor samples kept as
/// lead context. Throws StructuralError with fewer than 3 valid samples from
/// anchor to end.
SaccadeProfile trace_to_profile(const SaccadeTrace& trace, double dt = 1.0,
                                CategoryLabel category = {});

}  // namespace sackit
