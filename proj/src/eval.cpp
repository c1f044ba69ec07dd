#include "sackit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "sackit/error.hpp"

namespace sackit {

EvalReport evaluate(const PredictionModel& model, const SaccadeDataset& test, int bins) {
  if (test.empty()) throw StructuralError("evaluate: empty test set");
  if (bins < 1) throw StructuralError("evaluate: need at least one bin");
  std::vector<double> bin_sum(bins, 0.0);
  std::vector<std::size_t> bin_steps(bins, 0);
  double full = 0.0;
  double second = 0.0;
  for (const auto& p : test.profiles()) {
    const double amplitude = p.amplitude();
    const double duration = p.duration();
    double sum = 0.0;
    double late_sum = 0.0;
    std::size_t late = 0;
    for (Eigen::Index l = 0; l < p.size(); ++l) {
      const double t = p.dt * double(l);
      const double err = std::abs(predict(model, t, p.d[l]).alpha - amplitude);
      sum += err;
      if (t >= 0.5 * duration) {
        late_sum += err;
        ++late;
      }
      const double fraction = duration > 0.0 ? t / duration : 1.0;
      const int b = std::min(bins - 1, static_cast<int>(fraction * bins));
      bin_sum[b] += err;
      ++bin_steps[b];
    }
    full += sum / double(p.size());
    second += late_sum / double(late);
  }
  EvalReport report;
  report.saccades = test.size();
  report.mae_full = full / double(test.size());
  report.mae_second_half = second / double(test.size());
  for (int b = 0; b < bins; ++b) {
    report.error_vs_time.push_back({(b + 0.5) / bins,
                                    bin_steps[b] ? bin_sum[b] / double(bin_steps[b]) : 0.0,
                                    bin_steps[b]});
  }
  return report;
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::Customized: return "customized";
    case Strategy::ModelShear: return "model_shear";
    case Strategy::DataShear: return "data_shear";
    case Strategy::Average: return "average";
  }
  return "";
}

Strategy parse_strategy(std::string_view name) {
  for (Strategy s : {Strategy::Customized, Strategy::ModelShear, Strategy::DataShear, Strategy::Average}) {
    if (name == to_string(s)) return s;
  }
  throw ParseError("unknown strategy '" + std::string(name) + "'");
}

CategoryLabel calibration_label() { return {Factor::User, "calibration"}; }

PredictionModel adapt(Strategy strategy, const SaccadeDataset& calibration,
                      StrategyContext& context) {
  if (strategy == Strategy::Customized) return build_model(calibration, context.customized);
  if (!context.base) throw StructuralError("strategy needs a base corpus");
  if (!context.average) context.average = build_model(*context.base, context.model);
  switch (strategy) {
    case Strategy::Average:
      return *context.average;
    case Strategy::ModelShear: {
      const auto targets = category_means(calibration, CategoryLabel::none(),
                                          context.data_shear.alpha_step,
                                          context.data_shear.halfwidth, 1);
      return model_shear(*context.average, targets, context.model_shear);
    }
    case Strategy::DataShear: {
      SaccadeDataset merged = *context.base;
      merged.reserve(merged.size() + calibration.size());
      for (auto p : calibration.profiles()) {
        p.category = calibration_label();
        merged.add(std::move(p));
      }
      return build_model(data_shear(merged, calibration_label(), context.data_shear), context.model);
    }
    case Strategy::Customized: break;
  }
  throw StructuralError("unhandled strategy");
}

namespace {

std::mt19937_64 seeded(std::initializer_list<std::uint64_t> parts) {
  std::vector<std::uint32_t> words;
  for (auto p : parts) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

SaccadeDataset pick(const SaccadeDataset& from, const std::vector<std::size_t>& indices) {
  SaccadeDataset out(from.metadata());
  out.reserve(indices.size());
  for (auto i : indices) out.add(from.profiles()[i]);
  return out;
}

std::vector<std::size_t> shuffled(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  // Explicit Fisher-Yates: std::shuffle is not specified identically across
  // standard libraries.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng() % i;
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace

std::vector<SweepPoint> sweep(const SaccadeDataset& train, const SaccadeDataset& test,
                              Strategy strategy, StrategyContext& context,
                              const SweepOptions& options) {
  if (train.empty()) throw StructuralError("sweep: empty training set");
  std::vector<SweepPoint> points;
  for (std::size_t n : options.n_values) {
    if (n == 0 || n > train.size()) {
      throw StructuralError("sweep: n = " + std::to_string(n) + " outside [1, " +
                            std::to_string(train.size()) + "]");
    }
    SweepPoint point;
    point.n_train = n;
    point.reps = options.reps;
    std::vector<double> full;
    std::vector<double> second;
    for (std::size_t r = 0; r < options.reps; ++r) {
      auto rng = seeded({options.seed, n, r});
      std::vector<std::size_t> idx;
      if (options.with_replacement) {
        for (std::size_t k = 0; k < n; ++k) idx.push_back(rng() % train.size());
      } else {
        idx = shuffled(train.size(), rng);
        idx.resize(n);
      }
      try {
        const PredictionModel model = adapt(strategy, pick(train, idx), context);
        const EvalReport report = evaluate(model, test, options.bins);
        full.push_back(report.mae_full);
        second.push_back(report.mae_second_half);
      } catch (const Error& e) {
        ++point.failures;
        point.errors.emplace_back(e.what());
      }
    }
    if (!full.empty()) {
      const double k = double(full.size());
      point.mean_mae = std::accumulate(full.begin(), full.end(), 0.0) / k;
      point.mean_mae_second_half = std::accumulate(second.begin(), second.end(), 0.0) / k;
      double var = 0.0;
      for (double v : full) var += (v - point.mean_mae) * (v - point.mean_mae);
      point.std_mae = full.size() > 1 ? std::sqrt(var / (k - 1.0)) : 0.0;
    } else {
      point.mean_mae = point.mean_mae_second_half = point.std_mae =
          std::numeric_limits<double>::quiet_NaN();
    }
    points.push_back(std::move(point));
  }
  return points;
}

CategorySplit split_category(const SaccadeDataset& corpus, const CategoryLabel& label,
                             std::size_t test_count, std::uint64_t seed) {
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus.profiles()[i].category.matches(label)) members.push_back(i);
  }
  if (members.size() <= test_count) {
    throw StructuralError("split: category " + label.str() + " has only " +
                          std::to_string(members.size()) + " profiles");
  }
  auto rng = seeded({seed, 0x5917ULL});
  const auto order = shuffled(members.size(), rng);
  std::vector<bool> is_test(corpus.size(), false);
  for (std::size_t k = 0; k < test_count; ++k) is_test[members[order[k]]] = true;

  CategorySplit split{SaccadeDataset(corpus.metadata()), SaccadeDataset(corpus.metadata()),
                      SaccadeDataset(corpus.metadata())};
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& p = corpus.profiles()[i];
    if (is_test[i]) {
      split.test.add(p);
      continue;
    }
    split.base.add(p);
    if (p.category.matches(label)) split.pool.add(p);
  }
  return split;
}

SaccadeDataset subsample(const SaccadeDataset& dataset, std::size_t n, std::uint64_t seed) {
  if (n > dataset.size()) throw StructuralError("subsample: n exceeds dataset size");
  auto rng = seeded({seed, 0x5ab5ULL});
  auto idx = shuffled(dataset.size(), rng);
  idx.resize(n);
  return pick(dataset, idx);
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json j;
  j["saccades"] = report.saccades;
  j["mae_full"] = report.mae_full;
  j["mae_second_half"] = report.mae_second_half;
  j["error_vs_time"] = nlohmann::json::array();
  for (const auto& b : report.error_vs_time) {
    j["error_vs_time"].push_back({{"fraction", b.fraction}, {"mae", b.mae}, {"steps", b.steps}});
  }
  if (!report.sweep.empty()) {
    j["sweep"] = nlohmann::json::array();
    for (const auto& p : report.sweep) j["sweep"].push_back(to_json(p));
  }
  return j;
}

nlohmann::json to_json(const SweepPoint& point) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"n_train", point.n_train},
          {"mean_mae", num(point.mean_mae)},
          {"std_mae", num(point.std_mae)},
          {"mean_mae_second_half", num(point.mean_mae_second_half)},
          {"reps", point.reps},
          {"failures", point.failures}};
}

void write_error_curve_csv(std::ostream& out, const std::vector<std::string>& names,
                           const std::vector<EvalReport>& reports) {
  out << "model,fraction,mae,steps\n";
  for (std::size_t m = 0; m < reports.size(); ++m) {
    for (const auto& b : reports[m].error_vs_time) {
      out << names.at(m) << ',' << b.fraction << ',' << b.mae << ',' << b.steps << '\n';
    }
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<std::string>& names,
                     const std::vector<std::vector<SweepPoint>>& sweeps) {
  out << "strategy,n_train,mean_mae,std_mae,mean_mae_second_half,reps,failures\n";
  for (std::size_t s = 0; s < sweeps.size(); ++s) {
    for (const auto& p : sweeps[s]) {
      out << names.at(s) << ',' << p.n_train << ',' << p.mean_mae << ',' << p.std_mae << ','
          << p.mean_mae_second_half << ',' << p.reps << ',' << p.failures << '\n';
    }
  }
}

}  // namespace sackit
