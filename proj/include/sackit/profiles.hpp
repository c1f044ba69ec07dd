#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "sackit/types.hpp"

namespace sackit {

struct AmplitudeWindow {
  double center = 10.0;
  double halfwidth = 1.0;

  AmplitudeWindow() = default;
  AmplitudeWindow(double c, double hw);

  bool contains(double amplitude) const {
    return std::abs(amplitude - center) <= halfwidth;
  }
};

/// Linear interpolation of (t, d) at 0, dt, 2dt, ... up to the last t
/// (truncated to the grid). Requires t[0] == 0 and strictly increasing t.
Eigen::VectorXd resample(const Eigen::VectorXd& t, const Eigen::VectorXd& d, double dt);

/// Profiles matching `label` whose amplitude falls inside `window`;
/// outlier-flagged profiles are skipped.
std::vector<SaccadeProfile> select(const SaccadeDataset& dataset, const CategoryLabel& label,
                                   const AmplitudeWindow& window);

/// Mean profile over `profiles`. The result ends at the mean endpoint time
/// (rounded to the grid); profiles ending earlier hold their amplitude, and the
/// final mean is pinned to the mean amplitude.
MeanProfile mean_profile(std::span<const SaccadeProfile> profiles);

/// Envelope width normalised by the per-timestamp maximum standard deviation,
/// summed over the shortest mean's support. Zero-width terms contribute 0;
/// a positive width with zero spread throws NumericalError.
double dissimilarity(std::span<const MeanProfile> means);

}  // namespace sackit
