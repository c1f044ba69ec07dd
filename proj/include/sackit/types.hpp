#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace sackit {

/// One tracker sample. Angles in visual degrees, time in milliseconds.
struct GazeSample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  bool valid = true;

  Eigen::Vector2d position() const { return {x, y}; }
};

enum class Factor { None, Orientation, Depth, InitialMovement, User, Amplitude };

std::string_view to_string(Factor factor);
Factor parse_factor(std::string_view name);

/// (factor, category) pair. Only the combinations listed in the factor table
/// are constructible; User accepts any non-empty id.
class CategoryLabel {
 public:
  CategoryLabel() = default;
  CategoryLabel(Factor factor, std::string value);

  static CategoryLabel none() { return {}; }

  Factor factor() const { return factor_; }
  const std::string& value() const { return value_; }
  bool is_none() const { return factor_ == Factor::None; }

  /// True when `filter` selects this label. A None filter selects everything.
  bool matches(const CategoryLabel& filter) const;

  std::string str() const;

  friend bool operator==(const CategoryLabel&, const CategoryLabel&) = default;

 private:
  Factor factor_ = Factor::None;
  std::string value_;
};

/// Detected saccade in raw tracker samples. `samples` spans from 30 ms before
/// the anchor to the end sample (inclusive).
struct SaccadeTrace {
  std::vector<GazeSample> samples;
  std::size_t anchor_index = 0;
  std::size_t detection_index = 0;
  Eigen::Vector2d direction = Eigen::Vector2d::UnitX();

  const GazeSample& anchor() const { return samples[anchor_index]; }
  const GazeSample& end() const { return samples.back(); }
};

/// Displacement-vs-time curve sampled at t = l * dt, anchored at d[0] = 0.
/// The amplitude is the final displacement.
struct SaccadeProfile {
  double dt = 1.0;
  Eigen::VectorXd d;
  // Pre-anchor context at t = -dt, -2dt, ... (nearest first). Only the
  // streaming predictor looks at it.
  Eigen::VectorXd lead;
  CategoryLabel category;
  bool outlier = false;

  Eigen::Index size() const { return d.size(); }
  double amplitude() const { return d[d.size() - 1]; }
  double duration() const { return dt * static_cast<double>(d.size() - 1); }
};

/// Throws StructuralError unless d[0] == 0, all values finite, amplitude > 0
/// and dt > 0.
void validate(const SaccadeProfile& profile);

/// Per-timestamp mean displacement, population standard deviation and the
/// number of profiles with a real (non-held) sample at that timestamp.
struct MeanProfile {
  double dt = 1.0;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  Eigen::VectorXi count;
  std::size_t source_count = 0;
  CategoryLabel category;
  // Nominal amplitude of the selection window, NaN when not window-based.
  double center = std::numeric_limits<double>::quiet_NaN();

  Eigen::Index size() const { return mean.size(); }
  double amplitude() const { return mean[mean.size() - 1]; }
  double duration() const { return dt * static_cast<double>(mean.size() - 1); }
};

void validate(const MeanProfile& profile);

struct DatasetMetadata {
  std::string source;
  double tracker_rate_hz = 0.0;
  std::string units = "deg,ms";
};

/// Collection of validated profiles sharing one dt.
class SaccadeDataset {
 public:
  SaccadeDataset() = default;
  explicit SaccadeDataset(DatasetMetadata metadata) : metadata_(std::move(metadata)) {}

  /// Validates `profile` and rejects a dt differing from existing profiles.
  void add(SaccadeProfile profile);

  const std::vector<SaccadeProfile>& profiles() const { return profiles_; }
  const DatasetMetadata& metadata() const { return metadata_; }
  DatasetMetadata& metadata() { return metadata_; }

  std::size_t size() const { return profiles_.size(); }
  bool empty() const { return profiles_.empty(); }
  double dt() const { return profiles_.empty() ? 1.0 : profiles_.front().dt; }

  void reserve(std::size_t n) { profiles_.reserve(n); }

 private:
  DatasetMetadata metadata_;
  std::vector<SaccadeProfile> profiles_;
};

}  // namespace sackit
