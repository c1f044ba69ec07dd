#pragma once

#include <cmath>
#include <filesystem>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sackit/synth.hpp"
#include "sackit/types.hpp"

namespace testing {

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline sackit::SaccadeProfile profile(const Eigen::VectorXd& d,
                                      sackit::CategoryLabel label = {}) {
  sackit::SaccadeProfile p;
  p.d = d;
  p.category = std::move(label);
  return p;
}

/// d(t) = slope * t on 0..duration ms.
inline sackit::SaccadeProfile linear_profile(double slope, int duration) {
  Eigen::VectorXd d(duration + 1);
  for (int l = 0; l <= duration; ++l) d[l] = slope * l;
  return profile(d);
}

/// Noiseless generator profile on the 1 ms grid, ending at ceil(dilated T).
inline sackit::SaccadeProfile template_profile(double alpha, double dilation = 1.0,
                                               sackit::CategoryLabel label = {}) {
  sackit::SynthConfig cfg;
  const int n = static_cast<int>(std::ceil(dilation * cfg.duration(alpha)));
  Eigen::VectorXd d(n + 1);
  for (int l = 0; l <= n; ++l) d[l] = sackit::template_displacement(cfg, alpha, dilation, l);
  d[n] = alpha;
  return profile(d, std::move(label));
}

/// Smooth random profile: generator template with random amplitude, dilation
/// and shape exponent.
inline sackit::SaccadeProfile random_smooth_profile(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> amp(5.0, 40.0);
  std::uniform_real_distribution<double> dil(0.9, 1.2);
  std::uniform_real_distribution<double> shape(1.8, 2.4);
  sackit::SynthConfig cfg;
  cfg.shape_exponent = shape(rng);
  const double alpha = amp(rng);
  const double gamma = dil(rng);
  const int n = static_cast<int>(std::ceil(gamma * cfg.duration(alpha)));
  Eigen::VectorXd d(n + 1);
  for (int l = 0; l <= n; ++l) d[l] = sackit::template_displacement(cfg, alpha, gamma, l);
  d[n] = alpha;
  return profile(d);
}

/// Noiseless 120 Hz generator settings with a single horizontal category.
inline sackit::SynthConfig noiseless(double rate_hz = 120.0) {
  sackit::SynthConfig cfg;
  cfg.noise_sigma = 0.0;
  cfg.dropout = 0.0;
  cfg.rate_hz = rate_hz;
  cfg.categories = {{sackit::CategoryLabel(sackit::Factor::Orientation, "horizontal"), 1.0, 1.0}};
  return cfg;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("sackit_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
