#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sackit/types.hpp"

namespace sackit {

/// Shear factor in [-1, 1]. Time is in ms and displacement in degrees, so a
/// sample (t, d) moves to (t + lambda * d, d).
class ShearFactor {
 public:
  constexpr ShearFactor() = default;
  explicit ShearFactor(double lambda);

  double value() const { return lambda_; }

 private:
  double lambda_ = 0.0;
};

enum class ShearInterpolation {
  /// Natural cubic spline through the sheared samples.
  CubicSpline,
  /// Piecewise-linear through the sheared samples.
  Linear,
};

/// Shears a uniformly sampled displacement curve and re-interpolates it onto
/// the dt grid over [0, ceil(t_last)]. The last grid node carries the original
/// final displacement. Throws NumericalError when the sheared timestamps are
/// not strictly increasing.
Eigen::VectorXd shear_curve(const Eigen::VectorXd& d, double dt, ShearFactor lambda,
                            ShearInterpolation interp = ShearInterpolation::CubicSpline);

SaccadeProfile shear(const SaccadeProfile& profile, ShearFactor lambda,
                     ShearInterpolation interp = ShearInterpolation::CubicSpline);

/// Shears the mean curve; deviations and counts follow the same time map
/// (linearly interpolated, counts rounded).
MeanProfile shear(const MeanProfile& profile, ShearFactor lambda,
                  ShearInterpolation interp = ShearInterpolation::CubicSpline);

struct ShearFitOptions {
  double tolerance = 1e-4;
  int coarse_points = 21;
  ShearInterpolation interp = ShearInterpolation::CubicSpline;
};

struct ShearFit {
  double lambda = 0.0;
  double objective = 0.0;
  // Objective did not vary over the coarse scan; lambda is reported as 0.
  bool flat = false;
};

/// Sum of |shear(original, lambda) - target| over the union of both supports,
/// the shorter curve holding its last value. +inf for a non-invertible shear.
double shear_objective(const Eigen::VectorXd& original, const Eigen::VectorXd& target, double dt,
                       double lambda,
                       ShearInterpolation interp = ShearInterpolation::CubicSpline);

/// Shear factor that best maps `original` onto `target`: a coarse scan over
/// [-1, 1] picks the bracket, golden-section search refines it. Positive
/// values mean the original has to slow down.
ShearFit fit_shear(const Eigen::VectorXd& original, const Eigen::VectorXd& target, double dt,
                   const ShearFitOptions& options = {});
ShearFit fit_shear(const MeanProfile& original, const MeanProfile& target,
                   const ShearFitOptions& options = {});

struct ShearPoint {
  double alpha = 0.0;
  double lambda = 0.0;
  std::size_t count = 1;
};

/// f(alpha) = slope * alpha + intercept, clamped to [-1, 1] on evaluation.
struct ShearCurve {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<ShearPoint> points;

  std::size_t fitted_count() const { return points.size(); }
  double operator()(double alpha) const;
  ShearFactor at(double alpha) const { return ShearFactor((*this)(alpha)); }
};

/// Sum_i |slope * alpha_i + intercept - lambda_i| / count_i.
double shear_curve_objective(double slope, double intercept, std::span<const ShearPoint> points);

struct CurveFitOptions {
  double tolerance = 1e-6;
  int max_iterations = 500;
};

/// Count-weighted L1 line fit. IRLS provides the starting line (dense grid
/// search if it stalls); the result is then moved to the optimal pair of
/// interpolated points by exchange steps. Needs two distinct alphas.
ShearCurve fit_shear_curve(std::span<const ShearPoint> points, const CurveFitOptions& options = {});

}  // namespace sackit
