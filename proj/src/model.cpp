#include "sackit/model.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "sackit/error.hpp"

namespace sackit {

namespace {

Eigen::VectorXd hold_extend(const Eigen::VectorXd& v, Eigen::Index n) {
  Eigen::VectorXd out(n);
  const Eigen::Index m = std::min(n, v.size());
  out.head(m) = v.head(m);
  if (n > m) out.tail(n - m).setConstant(v[v.size() - 1]);
  return out;
}

// Pool-adjacent-violators: least-squares non-decreasing fit, equal weights.
void isotonic(Eigen::Ref<Eigen::VectorXd> v) {
  const Eigen::Index n = v.size();
  std::vector<double> level;
  std::vector<Eigen::Index> width;
  level.reserve(n);
  width.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    level.push_back(v[i]);
    width.push_back(1);
    while (level.size() > 1 && level[level.size() - 2] > level.back()) {
      const double w1 = double(width[width.size() - 2]);
      const double w2 = double(width.back());
      const double merged = (level[level.size() - 2] * w1 + level.back() * w2) / (w1 + w2);
      width[width.size() - 2] += width.back();
      level[level.size() - 2] = merged;
      level.pop_back();
      width.pop_back();
    }
  }
  Eigen::Index i = 0;
  for (std::size_t b = 0; b < level.size(); ++b) {
    for (Eigen::Index k = 0; k < width[b]; ++k) v[i++] = level[b];
  }
}

Eigen::Index grid_count(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw StructuralError("invalid amplitude grid");
  return static_cast<Eigen::Index>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

}  // namespace

PredictionModel model_from_rows(const std::vector<Eigen::VectorXd>& curves, double dt,
                                double alpha_min, double alpha_step) {
  if (curves.empty()) throw StructuralError("model needs at least one row");
  Eigen::Index cols = 0;
  for (const auto& c : curves) cols = std::max(cols, c.size());
  PredictionModel m;
  m.dt = dt;
  m.alpha_min = alpha_min;
  m.alpha_step = alpha_step;
  m.rows.resize(static_cast<Eigen::Index>(curves.size()), cols);
  m.durations.resize(static_cast<Eigen::Index>(curves.size()));
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    m.rows.row(r) = hold_extend(curves[i], cols).transpose();
    m.durations[r] = dt * double(curves[i].size() - 1);
  }
  return m;
}

void enforce_monotonicity(PredictionModel& model) {
  Eigen::MatrixXd& rows = model.rows;
  rows.col(0).setZero();
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index l = 1; l < rows.cols(); ++l) rows(i, l) = std::max(rows(i, l), rows(i, l - 1));
  }
  // Column-wise PAV keeps rows non-decreasing: PAV is order-preserving and
  // column l + 1 dominates column l.
  for (Eigen::Index l = 1; l < rows.cols(); ++l) {
    Eigen::VectorXd column = rows.col(l);
    isotonic(column);
    rows.col(l) = column;
  }
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    Eigen::Index last = 1;
    for (Eigen::Index l = 1; l < rows.cols(); ++l) {
      if (rows(i, l) != rows(i, l - 1)) last = l;
    }
    model.durations[i] = std::max(model.durations[i], model.dt * double(last));
  }
}

PredictionModel build_model(const SaccadeDataset& dataset, const ModelParams& params,
                            BuildDiagnostics* diagnostics) {
  if (dataset.empty()) throw StructuralError("build_model: empty dataset");
  if (params.min_bin_count == 0) throw StructuralError("build_model: min_bin_count must be >= 1");
  const Eigen::Index count = grid_count(params.alpha_min, params.alpha_max, params.alpha_step);
  const double dt = dataset.dt();

  std::vector<std::optional<Eigen::VectorXd>> curves(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) {
    const double alpha = params.alpha_min + params.alpha_step * double(i);
    const auto members =
        select(dataset, CategoryLabel::none(), AmplitudeWindow(alpha, params.window_halfwidth));
    if (members.size() >= params.min_bin_count) curves[i] = mean_profile(members).mean;
  }

  std::vector<Eigen::Index> valid;
  for (Eigen::Index i = 0; i < count; ++i) {
    if (curves[i]) valid.push_back(i);
  }
  if (valid.empty()) {
    throw NumericalError("build_model: no amplitude bin holds " +
                         std::to_string(params.min_bin_count) + " profiles");
  }
  const Eigen::Index first = valid.front();
  const Eigen::Index last = valid.back();
  if (diagnostics && (first > 0 || last < count - 1)) {
    diagnostics->warnings.push_back(
        "amplitude range shrunk to [" + std::to_string(params.alpha_min + params.alpha_step * first) +
        ", " + std::to_string(params.alpha_min + params.alpha_step * last) + "]");
  }

  // Interior gaps: pointwise linear interpolation of the hold-extended
  // neighbours.
  for (std::size_t v = 0; v + 1 < valid.size(); ++v) {
    const Eigen::Index a = valid[v];
    const Eigen::Index b = valid[v + 1];
    if (b - a < 2) continue;
    const Eigen::Index len = std::max(curves[a]->size(), curves[b]->size());
    const Eigen::VectorXd lo = hold_extend(*curves[a], len);
    const Eigen::VectorXd hi = hold_extend(*curves[b], len);
    for (Eigen::Index i = a + 1; i < b; ++i) {
      const double w = double(i - a) / double(b - a);
      curves[i] = ((1.0 - w) * lo + w * hi).eval();
      if (diagnostics) diagnostics->filled_alphas.push_back(params.alpha_min + params.alpha_step * i);
    }
  }

  std::vector<Eigen::VectorXd> rows;
  for (Eigen::Index i = first; i <= last; ++i) rows.push_back(*curves[i]);
  PredictionModel model =
      model_from_rows(rows, dt, params.alpha_min + params.alpha_step * double(first), params.alpha_step);
  enforce_monotonicity(model);
  return model;
}

AmplitudePrediction predict(const PredictionModel& model, double t, double d) {
  const Eigen::Index n = model.alpha_count();
  if (n == 1) return {model.alpha_min, true};

  const double c = std::max(t, 0.0) / model.dt;
  const Eigen::Index cols = model.time_count();
  Eigen::Index c0 = static_cast<Eigen::Index>(std::floor(c));
  double frac = c - double(c0);
  if (c0 >= cols - 1) {
    c0 = cols - 1;
    frac = 0.0;
  }
  auto value = [&](Eigen::Index i) {
    const double a = model.rows(i, c0);
    return frac > 0.0 ? a + frac * (model.rows(i, c0 + 1) - a) : a;
  };

  const double v_lo = value(0);
  const double v_hi = value(n - 1);
  const bool degenerate = v_lo == v_hi;
  if (d <= v_lo) return {model.alpha_min, d < v_lo || degenerate};
  if (d > v_hi) return {model.alpha_max(), true};

  // Invariant: value(lo) < d <= value(hi).
  Eigen::Index lo = 0;
  Eigen::Index hi = n - 1;
  while (hi - lo > 1) {
    const Eigen::Index mid = (lo + hi) / 2;
    if (value(mid) >= d) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const double a = value(lo);
  const double b = value(hi);
  return {model.alpha(lo) + (d - a) / (b - a) * model.alpha_step, false};
}

std::vector<SaccadeProfile> recover_profiles(const PredictionModel& model) {
  std::vector<SaccadeProfile> out;
  out.reserve(static_cast<std::size_t>(model.alpha_count()));
  for (Eigen::Index i = 0; i < model.alpha_count(); ++i) {
    const auto len = std::clamp<Eigen::Index>(
        static_cast<Eigen::Index>(std::llround(model.durations[i] / model.dt)) + 1, 2,
        model.time_count());
    SaccadeProfile p;
    p.dt = model.dt;
    p.d = model.rows.row(i).head(len).transpose();
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

int odd_window(int requested, Eigen::Index n) {
  int w = static_cast<int>(std::min<Eigen::Index>(requested, n));
  if (w % 2 == 0) --w;
  return std::max(w, 1);
}

// Point reflection about the end samples; preserves straight lines.
double reflected(const Eigen::VectorXd& v, Eigen::Index i) {
  const Eigen::Index n = v.size();
  if (i < 0) return 2.0 * v[0] - v[std::min(-i, n - 1)];
  if (i >= n) return 2.0 * v[n - 1] - v[std::max<Eigen::Index>(2 * (n - 1) - i, 0)];
  return v[i];
}

Eigen::VectorXd median_filter(const Eigen::VectorXd& v, int window) {
  const int half = window / 2;
  Eigen::VectorXd out(v.size());
  std::vector<double> buf(static_cast<std::size_t>(window));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    for (int k = -half; k <= half; ++k) buf[k + half] = reflected(v, i + k);
    std::nth_element(buf.begin(), buf.begin() + half, buf.end());
    out[i] = buf[half];
  }
  return out;
}

Eigen::VectorXd gaussian_filter(const Eigen::VectorXd& v, int window, double sigma) {
  const int half = window / 2;
  Eigen::VectorXd kernel(window);
  for (int k = -half; k <= half; ++k) kernel[k + half] = std::exp(-0.5 * k * k / (sigma * sigma));
  kernel /= kernel.sum();
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double acc = 0.0;
    for (int k = -half; k <= half; ++k) acc += kernel[k + half] * reflected(v, i + k);
    out[i] = acc;
  }
  return out;
}

}  // namespace

SaccadeProfile denoise_profile(const SaccadeProfile& profile, const DenoiseParams& params) {
  if (profile.d.size() < 2) throw StructuralError("denoise_profile needs at least two samples");
  if (!(params.gaussian_sigma > 0.0)) throw StructuralError("gaussian sigma must be positive");
  SaccadeProfile out = profile;
  const Eigen::Index n = profile.d.size();
  out.d = median_filter(profile.d, odd_window(params.median_window, n));
  out.d = gaussian_filter(out.d, odd_window(params.gaussian_window, n), params.gaussian_sigma);
  out.d[0] = profile.d[0];
  out.d[n - 1] = profile.d[n - 1];
  return out;
}

std::vector<MeanProfile> category_means(const SaccadeDataset& dataset, const CategoryLabel& label,
                                        double alpha_step, double halfwidth,
                                        std::size_t min_count) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : dataset.profiles()) {
    if (p.outlier || !p.category.matches(label)) continue;
    lo = std::min(lo, p.amplitude());
    hi = std::max(hi, p.amplitude());
  }
  std::vector<MeanProfile> means;
  if (!(lo <= hi)) return means;
  const double first = std::ceil(lo / alpha_step) * alpha_step;
  const double last = std::floor(hi / alpha_step) * alpha_step;
  if (first > last) return means;
  const Eigen::Index count = grid_count(first, last, alpha_step);
  for (Eigen::Index i = 0; i < count; ++i) {
    const double alpha = first + alpha_step * double(i);
    const auto members = select(dataset, label, AmplitudeWindow(alpha, halfwidth));
    if (members.size() < std::max<std::size_t>(min_count, 1)) continue;
    MeanProfile m = mean_profile(members);
    m.center = alpha;
    m.category = label;
    means.push_back(std::move(m));
  }
  return means;
}

PredictionModel model_shear(const PredictionModel& model, std::span<const MeanProfile> targets,
                            const ModelShearOptions& options, ShearCurve* curve_out) {
  std::vector<SaccadeProfile> rows = recover_profiles(model);
  if (options.denoise_rows) {
    for (auto& r : rows) r = denoise_profile(r, options.denoise);
  }

  std::vector<ShearPoint> points;
  for (const auto& target : targets) {
    if (target.dt != model.dt) throw StructuralError("model_shear: target dt differs from model dt");
    const double alpha = std::isfinite(target.center) ? target.center : target.amplitude();
    const auto i = static_cast<Eigen::Index>(std::llround((alpha - model.alpha_min) / model.alpha_step));
    if (i < 0 || i >= model.alpha_count()) continue;
    const ShearFit fit = fit_shear(rows[i].d, target.mean, model.dt, options.fit);
    points.push_back({model.alpha(i), fit.lambda, std::max<std::size_t>(target.source_count, 1)});
  }
  if (points.empty()) throw NumericalError("model_shear: no target inside the model range");
  ShearCurve curve = fit_shear_curve(points, options.curve);

  std::vector<Eigen::VectorXd> curves;
  curves.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double alpha = model.alpha(static_cast<Eigen::Index>(i));
    curves.push_back(shear_curve(rows[i].d, model.dt, curve.at(alpha), options.fit.interp));
  }
  PredictionModel out = model_from_rows(curves, model.dt, model.alpha_min, model.alpha_step);
  enforce_monotonicity(out);
  if (curve_out) *curve_out = std::move(curve);
  return out;
}

SaccadeDataset data_shear(const SaccadeDataset& dataset, const CategoryLabel& target,
                          const DataShearOptions& options, ShearCurve* curve_out) {
  const auto targets =
      category_means(dataset, target, options.alpha_step, options.halfwidth, options.min_target_count);
  if (targets.empty()) throw NumericalError("data_shear: target subset is empty");

  std::vector<ShearPoint> points;
  for (const auto& t : targets) {
    const auto all = select(dataset, CategoryLabel::none(), AmplitudeWindow(t.center, options.halfwidth));
    const MeanProfile original = mean_profile(all);
    const ShearFit fit = fit_shear(original, t, options.fit);
    points.push_back({t.center, fit.lambda, t.source_count});
  }
  ShearCurve curve = fit_shear_curve(points, options.curve);

  SaccadeDataset out(dataset.metadata());
  out.reserve(dataset.size());
  for (const auto& p : dataset.profiles()) {
    out.add(shear(p, curve.at(p.amplitude()), options.fit.interp));
  }
  if (curve_out) *curve_out = std::move(curve);
  return out;
}

PredictionModel time_shifted(const PredictionModel& model, double shift_ms) {
  const auto shift = static_cast<Eigen::Index>(std::llround(shift_ms / model.dt));
  if (shift < 0) throw StructuralError("time_shifted: negative shift");
  PredictionModel out = model;
  out.rows = Eigen::MatrixXd::Zero(model.rows.rows(), model.rows.cols() + shift);
  out.rows.rightCols(model.rows.cols()) = model.rows;
  out.durations.array() += model.dt * double(shift);
  return out;
}

}  // namespace sackit
