#include "sackit/shear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>

#include "sackit/error.hpp"
#include "sackit/interp.hpp"

namespace sackit {

ShearFactor::ShearFactor(double lambda) : lambda_(lambda) {
  if (!std::isfinite(lambda) || std::abs(lambda) > 1.0) {
    throw StructuralError("shear factor must lie in [-1, 1], got " + std::to_string(lambda));
  }
}

namespace {

struct ShearedSupport {
  Eigen::VectorXd times;  // sheared sample times
  Eigen::VectorXd grid;   // output grid, clamped to the last sheared time
  Eigen::Index size = 0;
};

ShearedSupport sheared_support(const Eigen::VectorXd& d, double dt, double lambda) {
  const Eigen::Index n = d.size();
  ShearedSupport s;
  s.times = Eigen::VectorXd::LinSpaced(n, 0.0, dt * double(n - 1)) + lambda * d;
  for (Eigen::Index i = 1; i < n; ++i) {
    if (!(s.times[i] > s.times[i - 1])) {
      throw NumericalError("non-invertible shear: sheared time not increasing at sample " +
                           std::to_string(i) + " (lambda = " + std::to_string(lambda) + ")");
    }
  }
  const double end = s.times[n - 1];
  const auto steps = static_cast<Eigen::Index>(std::ceil(end / dt - 1e-9));
  s.size = std::max<Eigen::Index>(steps + 1, 2);
  s.grid = Eigen::VectorXd::LinSpaced(s.size, 0.0, dt * double(s.size - 1)).cwiseMin(end);
  return s;
}

Eigen::VectorXd interpolate(const ShearedSupport& s, const Eigen::VectorXd& values,
                            ShearInterpolation interp) {
  if (interp == ShearInterpolation::Linear || values.size() < 3) {
    return interp_linear<double>(s.times, values, s.grid);
  }
  return NaturalCubicSpline<double>(s.times, values).evaluate_sorted(s.grid);
}

}  // namespace

Eigen::VectorXd shear_curve(const Eigen::VectorXd& d, double dt, ShearFactor lambda,
                            ShearInterpolation interp) {
  if (d.size() < 2) throw StructuralError("shear needs at least two samples");
  if (lambda.value() == 0.0) return d;
  const ShearedSupport s = sheared_support(d, dt, lambda.value());
  Eigen::VectorXd out = interpolate(s, d, interp);
  out[0] = d[0];
  out[out.size() - 1] = d[d.size() - 1];
  return out;
}

SaccadeProfile shear(const SaccadeProfile& profile, ShearFactor lambda, ShearInterpolation interp) {
  SaccadeProfile out = profile;
  out.d = shear_curve(profile.d, profile.dt, lambda, interp);
  return out;
}

MeanProfile shear(const MeanProfile& profile, ShearFactor lambda, ShearInterpolation interp) {
  if (lambda.value() == 0.0) return profile;
  if (profile.size() < 2) throw StructuralError("shear needs at least two samples");
  const ShearedSupport s = sheared_support(profile.mean, profile.dt, lambda.value());
  MeanProfile out = profile;
  out.mean = interpolate(s, profile.mean, interp);
  out.mean[0] = profile.mean[0];
  out.mean[out.size() - 1] = profile.amplitude();
  out.stddev = interp_linear<double>(s.times, profile.stddev, s.grid).cwiseMax(0.0);
  const Eigen::VectorXd counts =
      interp_linear<double>(s.times, profile.count.cast<double>(), s.grid);
  out.count = counts.array().round().cast<int>().max(1).matrix();
  return out;
}

double shear_objective(const Eigen::VectorXd& original, const Eigen::VectorXd& target, double dt,
                       double lambda, ShearInterpolation interp) {
  Eigen::VectorXd sheared;
  try {
    sheared = shear_curve(original, dt, ShearFactor(lambda), interp);
  } catch (const NumericalError&) {
    return std::numeric_limits<double>::infinity();
  }
  const Eigen::Index n = std::max(sheared.size(), target.size());
  double sum = 0.0;
  for (Eigen::Index l = 0; l < n; ++l) {
    const double a = sheared[std::min(l, sheared.size() - 1)];
    const double b = target[std::min(l, target.size() - 1)];
    sum += std::abs(a - b);
  }
  return sum;
}

ShearFit fit_shear(const Eigen::VectorXd& original, const Eigen::VectorXd& target, double dt,
                   const ShearFitOptions& options) {
  if (original.size() < 2 || target.size() < 2) {
    throw StructuralError("fit_shear needs profiles with at least two samples");
  }
  if (!original.allFinite() || !target.allFinite()) {
    throw NumericalError("fit_shear: non-finite objective (profile holds non-finite values)");
  }
  if (options.coarse_points < 3) throw StructuralError("fit_shear: coarse scan needs >= 3 points");

  auto objective = [&](double lambda) {
    return shear_objective(original, target, dt, lambda, options.interp);
  };

  ShearFit best{0.0, std::numeric_limits<double>::infinity(), false};
  auto consider = [&](double lambda, double value) {
    if (value < best.objective) best = {lambda, value, false};
  };

  const int n = options.coarse_points;
  std::vector<double> lambdas(n);
  std::vector<double> values(n);
  double lo_val = std::numeric_limits<double>::infinity();
  double hi_val = -std::numeric_limits<double>::infinity();
  bool all_finite = true;
  int best_index = -1;
  for (int i = 0; i < n; ++i) {
    lambdas[i] = std::clamp(-1.0 + 2.0 * i / (n - 1), -1.0, 1.0);
    values[i] = objective(lambdas[i]);
    if (std::isnan(values[i])) throw NumericalError("fit_shear: non-finite objective");
    if (!std::isfinite(values[i])) {
      all_finite = false;
      continue;
    }
    lo_val = std::min(lo_val, values[i]);
    hi_val = std::max(hi_val, values[i]);
    if (best_index < 0 || values[i] < values[best_index]) best_index = i;
  }
  if (best_index < 0) throw NumericalError("fit_shear: objective infinite over [-1, 1]");
  if (all_finite && hi_val - lo_val <= 1e-12 * (1.0 + std::abs(lo_val))) {
    return {0.0, objective(0.0), true};
  }
  consider(lambdas[best_index], values[best_index]);

  // Golden-section refinement inside the neighbouring coarse cells.
  double lo = lambdas[std::max(best_index - 1, 0)];
  double hi = lambdas[std::min(best_index + 1, n - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double e = lo + inv_phi * (hi - lo);
  double fc = objective(c);
  double fe = objective(e);
  consider(c, fc);
  consider(e, fe);
  while (hi - lo > options.tolerance) {
    if (fc <= fe) {
      hi = e;
      e = c;
      fe = fc;
      c = hi - inv_phi * (hi - lo);
      fc = objective(c);
      consider(c, fc);
    } else {
      lo = c;
      c = e;
      fc = fe;
      e = lo + inv_phi * (hi - lo);
      fe = objective(e);
      consider(e, fe);
    }
  }
  const double mid = 0.5 * (lo + hi);
  consider(mid, objective(mid));
  return best;
}

ShearFit fit_shear(const MeanProfile& original, const MeanProfile& target,
                   const ShearFitOptions& options) {
  if (original.dt != target.dt) throw StructuralError("fit_shear: profiles do not share dt");
  if (original.mean[0] != 0.0 || target.mean[0] != 0.0) {
    throw StructuralError("fit_shear: profiles must start at (0, 0)");
  }
  return fit_shear(original.mean, target.mean, original.dt, options);
}

double ShearCurve::operator()(double alpha) const {
  return std::clamp(slope * alpha + intercept, -1.0, 1.0);
}

double shear_curve_objective(double slope, double intercept, std::span<const ShearPoint> points) {
  double sum = 0.0;
  for (const auto& p : points) {
    sum += std::abs(slope * p.alpha + intercept - p.lambda) / static_cast<double>(p.count);
  }
  return sum;
}

namespace {

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
};

// Weighted median of values; the lower one on exact half-weight ties.
double weighted_median(std::vector<std::pair<double, double>> value_weight) {
  std::sort(value_weight.begin(), value_weight.end());
  double total = 0.0;
  for (const auto& [v, w] : value_weight) total += w;
  double acc = 0.0;
  for (const auto& [v, w] : value_weight) {
    acc += w;
    if (acc >= 0.5 * total) return v;
  }
  return value_weight.back().first;
}

Line through(const ShearPoint& p, const ShearPoint& q) {
  const double slope = (q.lambda - p.lambda) / (q.alpha - p.alpha);
  return {slope, p.lambda - slope * p.alpha};
}

// Returns false when IRLS does not settle within the iteration budget.
bool irls(std::span<const ShearPoint> points, const CurveFitOptions& options, Line& line) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd y(n);
  Eigen::VectorXd base(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = points[i].alpha;
    design(i, 1) = 1.0;
    y[i] = points[i].lambda;
    base[i] = 1.0 / static_cast<double>(points[i].count);
  }
  constexpr double floor_residual = 1e-10;
  Eigen::VectorXd weights = base;
  Eigen::Vector2d theta = Eigen::Vector2d::Zero();
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const Eigen::Matrix2d normal = design.transpose() * weights.asDiagonal() * design;
    const Eigen::Vector2d rhs = design.transpose() * weights.asDiagonal() * y;
    const Eigen::Vector2d next = normal.ldlt().solve(rhs);
    if (!next.allFinite()) return false;
    const bool settled = (next - theta).cwiseAbs().maxCoeff() < options.tolerance;
    theta = next;
    if (settled && iter > 0) {
      line = {theta[0], theta[1]};
      return true;
    }
    const Eigen::VectorXd residual = (y - design * theta).cwiseAbs().cwiseMax(floor_residual);
    weights = base.cwiseQuotient(residual);
  }
  line = {theta[0], theta[1]};
  return false;
}

// Dense scan over slopes; for each slope the best intercept is a weighted
// median of the offsets.
Line grid_search(std::span<const ShearPoint> points) {
  double smin = std::numeric_limits<double>::infinity();
  double smax = -smin;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (points[i].alpha == points[j].alpha) continue;
      const double s = through(points[i], points[j]).slope;
      smin = std::min(smin, s);
      smax = std::max(smax, s);
    }
  }
  constexpr int steps = 4000;
  Line best;
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> offsets(points.size());
  for (int k = 0; k <= steps; ++k) {
    const double slope = smin + (smax - smin) * k / steps;
    for (std::size_t i = 0; i < points.size(); ++i) {
      offsets[i] = {points[i].lambda - slope * points[i].alpha,
                    1.0 / static_cast<double>(points[i].count)};
    }
    const double intercept = weighted_median(offsets);
    const double value = shear_curve_objective(slope, intercept, points);
    if (value < best_value) {
      best_value = value;
      best = {slope, intercept};
    }
  }
  return best;
}

// Exchange steps between lines interpolating two points. An L1 line fit has
// an optimum interpolating two points, and a two-point line is optimal once
// no pivot about one of the points it passes through lowers the objective.
Line polish(std::span<const ShearPoint> points, Line start) {
  const std::size_t n = points.size();
  auto value_of = [&](const Line& l) { return shear_curve_objective(l.slope, l.intercept, points); };

  // Snap to the two smallest residuals with distinct alphas.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ra = std::abs(start.slope * points[a].alpha + start.intercept - points[a].lambda);
    const double rb = std::abs(start.slope * points[b].alpha + start.intercept - points[b].lambda);
    return ra < rb;
  });
  Line current = start;
  double current_value = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    if (points[order[k]].alpha != points[order[0]].alpha) {
      current = through(points[order[0]], points[order[k]]);
      current_value = value_of(current);
      break;
    }
  }

  const double eps = 1e-12;
  for (std::size_t guard = 0; guard < 10 * n * n; ++guard) {
    bool improved = false;
    for (std::size_t p = 0; p < n && !improved; ++p) {
      const double rp =
          std::abs(current.slope * points[p].alpha + current.intercept - points[p].lambda);
      if (rp > 1e-9 * (1.0 + std::abs(points[p].lambda))) continue;
      for (std::size_t q = 0; q < n; ++q) {
        if (q == p || points[q].alpha == points[p].alpha) continue;
        const Line candidate = through(points[p], points[q]);
        const double v = value_of(candidate);
        if (v < current_value - eps * (1.0 + current_value)) {
          current = candidate;
          current_value = v;
          improved = true;
          break;
        }
      }
    }
    if (!improved) break;
  }
  return current;
}

}  // namespace

ShearCurve fit_shear_curve(std::span<const ShearPoint> points, const CurveFitOptions& options) {
  if (points.empty()) throw StructuralError("fit_shear_curve: no points");
  for (const auto& p : points) {
    if (p.count == 0) throw StructuralError("fit_shear_curve: point with zero count");
    if (!std::isfinite(p.alpha) || !std::isfinite(p.lambda)) {
      throw NumericalError("fit_shear_curve: non-finite point");
    }
  }
  const bool distinct = std::any_of(points.begin(), points.end(), [&](const ShearPoint& p) {
    return p.alpha != points.front().alpha;
  });
  if (!distinct) {
    throw NumericalError("fit_shear_curve: degenerate fit, all points share alpha = " +
                         std::to_string(points.front().alpha));
  }

  Line line;
  if (!irls(points, options, line)) line = grid_search(points);
  line = polish(points, line);

  ShearCurve curve;
  curve.slope = line.slope;
  curve.intercept = line.intercept;
  curve.points.assign(points.begin(), points.end());
  return curve;
}

}  // namespace sackit
