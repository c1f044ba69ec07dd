#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sackit/profiles.hpp"
#include "sackit/shear.hpp"
#include "sackit/types.hpp"

namespace sackit {

/// Amplitude lookup table: rows(i, l) is the mean displacement of saccades
/// with amplitude alpha(i) at t = l * dt. Each row holds its final value past
/// its own duration, so every column is a complete cross-section.
struct PredictionModel {
  double dt = 1.0;
  double alpha_min = 5.0;
  double alpha_step = 1.0;
  Eigen::MatrixXd rows;
  Eigen::VectorXd durations;

  Eigen::Index alpha_count() const { return rows.rows(); }
  Eigen::Index time_count() const { return rows.cols(); }
  double alpha(Eigen::Index i) const { return alpha_min + alpha_step * double(i); }
  double alpha_max() const { return alpha(alpha_count() - 1); }
};

struct ModelParams {
  double alpha_min = 5.0;
  double alpha_max = 45.0;
  double alpha_step = 1.0;
  double window_halfwidth = 1.0;
  std::size_t min_bin_count = 5;
};

struct BuildDiagnostics {
  std::vector<double> filled_alphas;  // rows interpolated from neighbours
  std::vector<std::string> warnings;
};

/// Mean profile per amplitude bin, sparse bins interpolated from their valid
/// neighbours, unfillable edge bins dropped, then monotonicity enforced.
PredictionModel build_model(const SaccadeDataset& dataset, const ModelParams& params = {},
                            BuildDiagnostics* diagnostics = nullptr);

/// Running max along t in every row, then an isotonic (pool-adjacent-
/// violators) pass along alpha in every column; the first column is zeroed.
void enforce_monotonicity(PredictionModel& model);

/// Assembles a model from per-row curves of possibly different lengths.
PredictionModel model_from_rows(const std::vector<Eigen::VectorXd>& curves, double dt,
                                double alpha_min, double alpha_step);

struct AmplitudePrediction {
  double alpha = 0.0;
  // Query fell outside the table (or the cross-section is degenerate) and the
  // result was clamped to the amplitude range.
  bool saturated = false;
};

/// Amplitude whose profile passes through (t, d), interpolating linearly in t
/// and between bracketing rows.
AmplitudePrediction predict(const PredictionModel& model, double t, double d);

/// One profile per amplitude row, truncated at the row's duration.
std::vector<SaccadeProfile> recover_profiles(const PredictionModel& model);

struct DenoiseParams {
  int median_window = 15;
  int gaussian_window = 5;
  double gaussian_sigma = 1.0;
};

/// Median filter followed by a truncated, renormalised Gaussian, both with
/// point-reflected edges; endpoints are pinned back afterwards.
SaccadeProfile denoise_profile(const SaccadeProfile& profile, const DenoiseParams& params = {});

/// Per-amplitude mean profiles of the profiles carrying `label`, on the
/// integer grid spanned by their amplitudes.
std::vector<MeanProfile> category_means(const SaccadeDataset& dataset, const CategoryLabel& label,
                                        double alpha_step = 1.0, double halfwidth = 1.0,
                                        std::size_t min_count = 1);

struct ModelShearOptions {
  DenoiseParams denoise;
  // When false the recovered rows are sheared as they are.
  bool denoise_rows = true;
  ShearFitOptions fit;
  CurveFitOptions curve;
};

/// Adapts a model to target mean profiles: recover rows, denoise, fit one
/// shear per target amplitude, fit the amplitude curve, shear every row by it
/// and re-grid.
PredictionModel model_shear(const PredictionModel& model, std::span<const MeanProfile> targets,
                            const ModelShearOptions& options = {},
                            ShearCurve* curve_out = nullptr);

struct DataShearOptions {
  double alpha_step = 1.0;
  double halfwidth = 1.0;
  std::size_t min_target_count = 1;
  ShearFitOptions fit;
  CurveFitOptions curve;
};

/// Shears every profile of `dataset` towards the profiles carrying
/// `target`, using the amplitude curve fitted between whole-dataset and
/// target mean profiles.
SaccadeDataset data_shear(const SaccadeDataset& dataset, const CategoryLabel& target,
                          const DataShearOptions& options = {}, ShearCurve* curve_out = nullptr);

/// Delays every row by `shift_ms` (zero displacement before the shift).
PredictionModel time_shifted(const PredictionModel& model, double shift_ms);

}  // namespace sackit
