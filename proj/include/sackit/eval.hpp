#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sackit/model.hpp"
#include "sackit/types.hpp"

namespace sackit {

struct ErrorBin {
  double fraction = 0.0;  // bin centre, fraction of the saccade duration
  double mae = 0.0;
  std::size_t steps = 0;
};

struct SweepPoint {
  std::size_t n_train = 0;
  double mean_mae = 0.0;
  double std_mae = 0.0;
  double mean_mae_second_half = 0.0;
  std::size_t reps = 0;
  std::size_t failures = 0;  // reps whose build or adaptation threw
  std::vector<std::string> errors;
};

struct EvalReport {
  double mae_full = 0.0;
  double mae_second_half = 0.0;
  std::vector<ErrorBin> error_vs_time;
  std::vector<SweepPoint> sweep;
  std::size_t saccades = 0;
};

/// Predicts every test saccade at each of its samples. Errors are averaged
/// over a saccade's steps first and then over saccades; the second half keeps
/// steps with t >= duration / 2. Error-vs-time pools steps into `bins` equal
/// bins of the elapsed fraction.
EvalReport evaluate(const PredictionModel& model, const SaccadeDataset& test, int bins = 20);

enum class Strategy { Customized, ModelShear, DataShear, Average };

std::string_view to_string(Strategy strategy);
Strategy parse_strategy(std::string_view name);

/// Everything a strategy needs besides the calibration sample.
struct StrategyContext {
  // Training corpus of the average model; data shear appends the
  // calibration sample to it.
  const SaccadeDataset* base = nullptr;
  // Prebuilt from `base` when null.
  std::optional<PredictionModel> average;
  ModelParams model;
  // Customized models are built from the calibration sample alone.
  ModelParams customized = {5.0, 45.0, 1.0, 1.0, 1};
  ModelShearOptions model_shear;
  DataShearOptions data_shear;
};

/// Label given to calibration profiles when they are merged into the base
/// corpus for data shear.
CategoryLabel calibration_label();

/// Model for `strategy` adapted with `calibration`.
PredictionModel adapt(Strategy strategy, const SaccadeDataset& calibration,
                      StrategyContext& context);

struct SweepOptions {
  std::vector<std::size_t> n_values = {10, 20, 50, 100, 200};
  std::size_t reps = 20;
  std::uint64_t seed = 1;
  bool with_replacement = true;
  int bins = 20;
};

/// Training-size sweep: for each n and rep, draws n calibration profiles from
/// `train`, adapts per `strategy` and evaluates on `test`. Rep r of size n uses
/// a generator seeded by (seed, n, r). Failed reps are counted per point.
std::vector<SweepPoint> sweep(const SaccadeDataset& train, const SaccadeDataset& test,
                              Strategy strategy, StrategyContext& context,
                              const SweepOptions& options = {});

/// Held-out split of one category: `test_count` profiles carrying `label` go
/// to test, the remaining ones to the calibration pool; base is everything
/// except test.
struct CategorySplit {
  SaccadeDataset base;
  SaccadeDataset pool;
  SaccadeDataset test;
};
CategorySplit split_category(const SaccadeDataset& corpus, const CategoryLabel& label,
                             std::size_t test_count, std::uint64_t seed);

/// First `n` profiles of a seeded shuffle of `dataset`.
SaccadeDataset subsample(const SaccadeDataset& dataset, std::size_t n, std::uint64_t seed);

nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const SweepPoint& point);

void write_error_curve_csv(std::ostream& out, const std::vector<std::string>& names,
                           const std::vector<EvalReport>& reports);
void write_sweep_csv(std::ostream& out, const std::vector<std::string>& names,
                     const std::vector<std::vector<SweepPoint>>& sweeps);

}  // namespace sackit
