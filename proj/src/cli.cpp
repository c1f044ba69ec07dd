#include "sackit/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "sackit/config.hpp"
#include "sackit/detection.hpp"
#include "sackit/error.hpp"
#include "sackit/eval.hpp"
#include "sackit/io.hpp"
#include "sackit/model.hpp"
#include "sackit/predictor.hpp"
#include "sackit/profiles.hpp"
#include "sackit/shear.hpp"
#include "sackit/synth.hpp"

namespace sackit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Semantically invalid arguments that CLI11 cannot catch itself.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

CategoryLabel parse_label(const std::string& text) {
  if (text.empty() || text == "none") return {};
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("label must look like factor:value, got '" + text + "'");
  try {
    return {parse_factor(text.substr(0, colon)), text.substr(colon + 1)};
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

StreamFormat parse_format(const std::string& s) {
  if (s == "auto") return StreamFormat::Auto;
  if (s == "jsonl") return StreamFormat::Jsonl;
  if (s == "csv") return StreamFormat::Csv;
  throw UsageError("format must be auto, jsonl or csv");
}

// Refuses to write over any of the inputs.
void guard_output(const std::string& out, std::initializer_list<std::string> inputs) {
  for (const auto& in : inputs) {
    if (in.empty() || out.empty()) continue;
    std::error_code ec;
    if (fs::exists(out) && fs::equivalent(out, in, ec)) {
      throw UsageError("output " + out + " would overwrite input " + in);
    }
  }
}

SaccadeDataset dataset_from(const std::string& path) {
  Container c = read_container(fs::path(path));
  if (!c.dataset) throw StructuralError(path + " holds no dataset section");
  return std::move(*c.dataset);
}

PredictionModel model_from(const std::string& path) {
  Container c = read_container(fs::path(path));
  if (!c.model) throw StructuralError(path + " holds no model section");
  return std::move(*c.model);
}

SaccadeDataset filtered(const SaccadeDataset& d, const CategoryLabel& label) {
  if (label.is_none()) return d;
  SaccadeDataset out(d.metadata());
  for (const auto& p : d.profiles()) {
    if (p.category.matches(label)) out.add(p);
  }
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << std::setprecision(17);
  return f;
}

json curve_json(const ShearCurve& curve) {
  json pts = json::array();
  for (const auto& p : curve.points) {
    pts.push_back({{"alpha", p.alpha}, {"lambda", p.lambda}, {"count", p.count}});
  }
  return {{"a", curve.slope}, {"b", curve.intercept}, {"points", pts}};
}

void write_json(const std::string& path, const json& j) {
  auto f = open_out(path);
  f << j.dump(2) << '\n';
}

json truth_json(std::size_t i, const SaccadeTruth& t) {
  return {{"index", i},
          {"onset", t.onset},
          {"amplitude", t.amplitude},
          {"duration", t.duration},
          {"dilation", t.dilation},
          {"category", t.category.str()},
          {"direction", {t.direction.x(), t.direction.y()}}};
}

// Options shared by every subcommand, resolved after parsing.
struct Globals {
  std::string config_path;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;

  Config resolve() const {
    Config c = resolve_config(config_path.empty() ? std::nullopt
                                                  : std::optional<fs::path>(config_path));
    if (seed_opt && seed_opt->count()) {
      c.seed = c.synth.seed = c.eval.seed = seed;
    }
    return c;
  }
};

template <typename T>
void override_if(CLI::Option* opt, T& target, const T& value) {
  if (opt && opt->count()) target = value;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Saccade landing prediction and shear-based model adaptation", "sackit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path,
                 std::string("JSON config file (default: $") + kConfigEnv + ")");
  g.seed_opt = app.add_option("--seed", g.seed, "Random seed, overrides the config");

  // detect
  auto* detect = app.add_subcommand("detect", "Detect saccades in a gaze stream");
  std::string d_input, d_out, d_format = "auto", d_label, d_params;
  double d_dt = 1.0;
  DetectionParams d_over;
  detect->add_option("--input", d_input, "Gaze stream (JSONL or CSV)")->required();
  detect->add_option("--out", d_out, "Output container (traces and profiles)")->required();
  detect->add_option("--format", d_format, "auto, jsonl or csv");
  detect->add_option("--label", d_label, "Category for the profiles, factor:value");
  detect->add_option("--dt", d_dt, "Profile resampling interval in ms");
  detect->add_option("--params", d_params, "Config file (same schema as --config)");
  auto* o_vdet = detect->add_option("--v-detect", d_over.v_detect, "Detection threshold, deg/s");
  auto* o_vanc = detect->add_option("--v-anchor", d_over.v_anchor, "Anchor threshold, deg/s");
  auto* o_gap = detect->add_option("--max-gap", d_over.max_gap, "Longest invalid gap, ms");
  auto* o_minamp = detect->add_option("--min-amplitude", d_over.min_amplitude, "Shortest saccade, deg");

  // mean
  auto* mean = app.add_subcommand("mean", "Mean profiles per category at one amplitude");
  std::string m_dataset, m_factor, m_value, m_out;
  double m_amp = 0.0, m_half = 0.0;
  mean->add_option("--dataset", m_dataset, "Dataset container")->required();
  mean->add_option("--factor", m_factor, "Factor to split by (or none)")->required();
  mean->add_option("--value", m_value, "Single category of the factor");
  mean->add_option("--amplitude", m_amp, "Window centre, deg")->required();
  auto* o_mhalf = mean->add_option("--halfwidth", m_half, "Window halfwidth, deg");
  mean->add_option("--out", m_out, "Output container")->required();

  // dissim
  auto* dissim = app.add_subcommand("dissim", "Dissimilarity of mean profiles, CSV on stdout");
  std::string s_means;
  dissim->add_option("--means", s_means, "Container with mean profiles")->required();

  // shear-fit
  auto* sfit = app.add_subcommand("shear-fit", "Fit the amplitude shear curve between mean sets");
  std::string f_orig, f_target, f_out;
  sfit->add_option("--original", f_orig, "Container with original means")->required();
  sfit->add_option("--target", f_target, "Container with target means")->required();
  sfit->add_option("--out", f_out, "Curve JSON {a, b, points}")->required();

  // build-model
  auto* build = app.add_subcommand("build-model", "Build the amplitude lookup model");
  std::string b_dataset, b_out = "model.sackit", b_label;
  ModelParams b_over;
  build->add_option("--dataset", b_dataset, "Dataset container")->required();
  build->add_option("--out", b_out, "Output model container");
  build->add_option("--label", b_label, "Only profiles of this category");
  auto* o_amin = build->add_option("--alpha-min", b_over.alpha_min, "Smallest amplitude row, deg");
  auto* o_amax = build->add_option("--alpha-max", b_over.alpha_max, "Largest amplitude row, deg");
  auto* o_astep = build->add_option("--alpha-step", b_over.alpha_step, "Row spacing, deg");
  auto* o_bhalf = build->add_option("--halfwidth", b_over.window_halfwidth, "Bin halfwidth, deg");
  auto* o_minbin = build->add_option("--min-bin-count", b_over.min_bin_count, "Profiles per valid bin");

  // shear-model
  auto* smodel = app.add_subcommand("shear-model", "Adapt a model to target mean profiles");
  std::string sm_model, sm_target, sm_out = "sheared.sackit", sm_label, sm_curve;
  bool sm_raw = false;
  smodel->add_option("--model", sm_model, "Model container")->required();
  smodel->add_option("--target", sm_target, "Container with means or a calibration dataset")->required();
  smodel->add_option("--label", sm_label, "Category filter for a target dataset");
  smodel->add_option("--out", sm_out, "Output model container");
  smodel->add_option("--curve", sm_curve, "Also write the fitted curve JSON");
  smodel->add_flag("--no-denoise", sm_raw, "Shear recovered rows without denoising");

  // shear-data
  auto* sdata = app.add_subcommand("shear-data", "Shear a dataset towards one of its categories");
  std::string sd_dataset, sd_target, sd_out, sd_model, sd_curve;
  sdata->add_option("--dataset", sd_dataset, "Dataset container")->required();
  sdata->add_option("--target-label", sd_target, "Target category, factor:value")->required();
  sdata->add_option("--out", sd_out, "Sheared dataset container")->required();
  sdata->add_option("--model-out", sd_model, "Also build a model from the sheared data");
  sdata->add_option("--curve", sd_curve, "Also write the fitted curve JSON");

  // predict
  auto* pred = app.add_subcommand("predict", "Predict the amplitude for one (t, d) query");
  std::string p_model;
  double p_t = 0.0, p_d = 0.0;
  pred->add_option("--model", p_model, "Model container")->required();
  pred->add_option("--t", p_t, "Elapsed time since the anchor, ms")->required();
  pred->add_option("--d", p_d, "Displacement from the anchor, deg")->required();

  // predict-stream
  auto* pstream = app.add_subcommand("predict-stream", "Online landing predictions for a gaze stream");
  std::string ps_model, ps_input, ps_out, ps_format = "auto";
  bool ps_latency = false;
  double ps_budget = 200.0;
  pstream->add_option("--model", ps_model, "Model container")->required();
  pstream->add_option("--input", ps_input, "Gaze stream (JSONL or CSV)")->required();
  pstream->add_option("--out", ps_out, "Predictions JSONL {t, x, y, alpha, flag}")->required();
  pstream->add_option("--format", ps_format, "auto, jsonl or csv");
  pstream->add_flag("--latency", ps_latency, "Report per-sample latency on stderr");
  pstream->add_option("--budget-us", ps_budget, "Latency budget per sample, microseconds");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus or gaze stream");
  std::size_t y_n = 0;
  std::string y_out, y_truth, y_stream;
  double y_fix = 500.0;
  synth->add_option("--n", y_n, "Number of saccades")->required();
  synth->add_option("--out", y_out, "Corpus container");
  synth->add_option("--truth", y_truth, "Ground truth JSONL");
  synth->add_option("--stream", y_stream, "Write a continuous gaze stream (JSONL) instead");
  synth->add_option("--fixation-ms", y_fix, "Fixation between stream saccades, ms");

  // eval
  auto* evalc = app.add_subcommand("eval", "Evaluate a model on a test dataset");
  std::string e_model, e_test, e_label, e_csv, e_json;
  evalc->add_option("--model", e_model, "Model container")->required();
  evalc->add_option("--test", e_test, "Test dataset container")->required();
  evalc->add_option("--label", e_label, "Only test profiles of this category");
  evalc->add_option("--csv", e_csv, "Error-vs-time CSV");
  evalc->add_option("--json", e_json, "JSON summary (default: stdout)");

  // sweep
  auto* sweepc = app.add_subcommand("sweep", "Bootstrap training-size sweep");
  std::string w_train, w_test, w_base, w_model, w_out, w_json;
  std::vector<std::string> w_strategies = {"customized", "model_shear", "data_shear", "average"};
  std::vector<std::size_t> w_n;
  std::size_t w_reps = 0;
  bool w_noreplace = false;
  sweepc->add_option("--train", w_train, "Calibration pool dataset")->required();
  sweepc->add_option("--test", w_test, "Test dataset")->required();
  sweepc->add_option("--base", w_base, "Corpus of the average model");
  sweepc->add_option("--model", w_model, "Prebuilt average model (else built from --base)");
  sweepc->add_option("--strategy", w_strategies, "customized, model_shear, data_shear, average")
      ->delimiter(',');
  auto* o_n = sweepc->add_option("--n", w_n, "Training sizes")->delimiter(',');
  auto* o_reps = sweepc->add_option("--reps", w_reps, "Bootstrap repetitions");
  sweepc->add_flag("--no-replacement", w_noreplace, "Draw without replacement");
  sweepc->add_option("--out", w_out, "CSV report (default: stdout)");
  sweepc->add_option("--json", w_json, "JSON summary");

  // plot-data
  auto* plot = app.add_subcommand("plot-data", "Per-figure CSVs from a labelled corpus");
  std::string q_corpus, q_label, q_factor, q_dir;
  std::size_t q_test = 150, q_cal = 20;
  plot->add_option("--corpus", q_corpus, "Labelled corpus container")->required();
  plot->add_option("--label", q_label, "Adapted category, factor:value")->required();
  plot->add_option("--factor", q_factor, "Factor broken down per category (default: the label's)");
  plot->add_option("--test-count", q_test, "Held-out profiles per category");
  plot->add_option("--calibration", q_cal, "Calibration saccades for the error curves");
  plot->add_option("--out-dir", q_dir, "Output directory")->required();

  std::vector<const char*> argv{"sackit"};
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kOk;
    err << app.help();
    return kUsage;
  }

  try {
    Config cfg = g.resolve();

    if (detect->parsed()) {
      if (!d_params.empty()) cfg = load_config(d_params);
      override_if(o_vdet, cfg.detection.v_detect, d_over.v_detect);
      override_if(o_vanc, cfg.detection.v_anchor, d_over.v_anchor);
      override_if(o_gap, cfg.detection.max_gap, d_over.max_gap);
      override_if(o_minamp, cfg.detection.min_amplitude, d_over.min_amplitude);
      cfg.detection.validate();
      const CategoryLabel label = parse_label(d_label);
      guard_output(d_out, {d_input});
      const auto samples = read_gaze_stream(fs::path(d_input), parse_format(d_format));
      Container c;
      c.metadata = {{"command", "detect"}, {"input", d_input}};
      c.traces = detect_saccades(samples, cfg.detection);
      SaccadeDataset ds(DatasetMetadata{d_input, 0.0, "deg,ms"});
      std::size_t skipped = 0;
      for (const auto& tr : c.traces) {
        try {
          ds.add(trace_to_profile(tr, d_dt, label));
        } catch (const StructuralError& e) {
          ++skipped;
          err << "warning: trace at t = " << tr.anchor().t << " ms skipped: " << e.what() << '\n';
        }
      }
      c.dataset = std::move(ds);
      write_container(fs::path(d_out), c);
      err << "detected " << c.traces.size() << " saccades, " << c.traces.size() - skipped
          << " profiles\n";
      return kOk;
    }

    if (mean->parsed()) {
      const double half = o_mhalf->count() ? m_half : cfg.model.window_halfwidth;
      const AmplitudeWindow window(m_amp, half);
      guard_output(m_out, {m_dataset});
      const SaccadeDataset ds = dataset_from(m_dataset);
      Factor factor;
      try {
        factor = parse_factor(m_factor);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      std::vector<CategoryLabel> labels;
      if (factor == Factor::None) {
        labels.push_back({});
      } else if (!m_value.empty()) {
        labels.push_back(parse_label(m_factor + ":" + m_value));
      } else {
        for (const auto& p : ds.profiles()) {
          if (p.category.factor() == factor &&
              std::find(labels.begin(), labels.end(), p.category) == labels.end()) {
            labels.push_back(p.category);
          }
        }
      }
      std::vector<MeanProfile> means;
      for (const auto& label : labels) {
        const auto members = select(ds, label, window);
        if (members.empty()) {
          err << "warning: no " << label.str() << " profiles within " << half << " deg of " << m_amp
              << '\n';
          continue;
        }
        MeanProfile m = mean_profile(members);
        m.center = m_amp;
        m.category = label;
        err << label.str() << ": " << members.size() << " profiles\n";
        means.push_back(std::move(m));
      }
      if (means.empty()) throw StructuralError("no mean profile could be formed");
      write_means(fs::path(m_out), means);
      return kOk;
    }

    if (dissim->parsed()) {
      const auto means = read_means(fs::path(s_means));
      std::map<std::pair<std::string, double>, std::vector<MeanProfile>> groups;
      for (const auto& m : means) {
        const double center = std::isfinite(m.center) ? m.center : std::round(m.amplitude());
        groups[{std::string(to_string(m.category.factor())), center}].push_back(m);
      }
      out << "factor,amplitude,categories,D\n";
      std::size_t rows = 0;
      for (const auto& [key, group] : groups) {
        if (group.size() < 2) continue;
        out << key.first << ',' << key.second << ',' << group.size() << ','
            << std::setprecision(10) << dissimilarity(group) << '\n';
        ++rows;
      }
      if (rows == 0) throw StructuralError("no factor has two or more mean profiles at one amplitude");
      return kOk;
    }

    if (sfit->parsed()) {
      guard_output(f_out, {f_orig, f_target});
      const auto originals = read_means(fs::path(f_orig));
      const auto targets = read_means(fs::path(f_target));
      auto key = [](const MeanProfile& m) {
        return std::isfinite(m.center) ? m.center : std::round(m.amplitude());
      };
      std::vector<ShearPoint> points;
      for (const auto& t : targets) {
        const auto it = std::find_if(originals.begin(), originals.end(), [&](const MeanProfile& o) {
          return std::abs(key(o) - key(t)) < 1e-9;
        });
        if (it == originals.end()) {
          err << "warning: no original mean at " << key(t) << " deg\n";
          continue;
        }
        const ShearFit fit = fit_shear(*it, t, cfg.model_shear.fit);
        points.push_back({key(t), fit.lambda, std::max<std::size_t>(t.source_count, 1)});
      }
      const ShearCurve curve = fit_shear_curve(points, cfg.model_shear.curve);
      write_json(f_out, curve_json(curve));
      err << "f(alpha) = " << curve.slope << " * alpha + " << curve.intercept << '\n';
      return kOk;
    }

    if (build->parsed()) {
      override_if(o_amin, cfg.model.alpha_min, b_over.alpha_min);
      override_if(o_amax, cfg.model.alpha_max, b_over.alpha_max);
      override_if(o_astep, cfg.model.alpha_step, b_over.alpha_step);
      override_if(o_bhalf, cfg.model.window_halfwidth, b_over.window_halfwidth);
      override_if(o_minbin, cfg.model.min_bin_count, b_over.min_bin_count);
      cfg.validate();
      const CategoryLabel label = parse_label(b_label);
      guard_output(b_out, {b_dataset});
      const SaccadeDataset ds = filtered(dataset_from(b_dataset), label);
      BuildDiagnostics diag;
      const PredictionModel model = build_model(ds, cfg.model, &diag);
      for (const auto& w : diag.warnings) err << "warning: " << w << '\n';
      write_model(fs::path(b_out), model);
      err << "model: " << model.alpha_count() << " rows " << model.alpha_min << "-"
          << model.alpha_max() << " deg, " << diag.filled_alphas.size() << " interpolated\n";
      return kOk;
    }

    if (smodel->parsed()) {
      const CategoryLabel label = parse_label(sm_label);
      guard_output(sm_out, {sm_model, sm_target});
      const PredictionModel model = model_from(sm_model);
      Container target = read_container(fs::path(sm_target));
      std::vector<MeanProfile> means = target.means;
      if (means.empty()) {
        if (!target.dataset) throw StructuralError(sm_target + " holds neither means nor a dataset");
        means = category_means(*target.dataset, label, cfg.data_shear.alpha_step,
                               cfg.data_shear.halfwidth, cfg.data_shear.min_target_count);
      }
      ModelShearOptions opts = cfg.model_shear;
      if (sm_raw) opts.denoise_rows = false;
      ShearCurve curve;
      const PredictionModel sheared = model_shear(model, means, opts, &curve);
      write_model(fs::path(sm_out), sheared);
      if (!sm_curve.empty()) write_json(sm_curve, curve_json(curve));
      err << "f(alpha) = " << curve.slope << " * alpha + " << curve.intercept << " from "
          << curve.points.size() << " targets\n";
      return kOk;
    }

    if (sdata->parsed()) {
      const CategoryLabel label = parse_label(sd_target);
      if (label.is_none()) throw UsageError("--target-label must name a category");
      guard_output(sd_out, {sd_dataset});
      guard_output(sd_model, {sd_dataset});
      const SaccadeDataset ds = dataset_from(sd_dataset);
      ShearCurve curve;
      const SaccadeDataset sheared = data_shear(ds, label, cfg.data_shear, &curve);
      write_dataset(fs::path(sd_out), sheared);
      if (!sd_curve.empty()) write_json(sd_curve, curve_json(curve));
      if (!sd_model.empty()) {
        BuildDiagnostics diag;
        write_model(fs::path(sd_model), build_model(sheared, cfg.model, &diag));
        for (const auto& w : diag.warnings) err << "warning: " << w << '\n';
      }
      err << "f(alpha) = " << curve.slope << " * alpha + " << curve.intercept << '\n';
      return kOk;
    }

    if (pred->parsed()) {
      if (p_t < 0.0 || p_d < 0.0) throw UsageError("--t and --d must be non-negative");
      const PredictionModel model = model_from(p_model);
      const AmplitudePrediction p = predict(model, p_t, p_d);
      out << std::fixed << std::setprecision(6) << p.alpha << '\n';
      if (p.saturated) err << "warning: prediction saturated at the model range\n";
      return kOk;
    }

    if (pstream->parsed()) {
      guard_output(ps_out, {ps_input, ps_model});
      auto model = std::make_shared<const PredictionModel>(model_from(ps_model));
      const auto samples = read_gaze_stream(fs::path(ps_input), parse_format(ps_format));
      PredictorParams params;
      params.detection = cfg.detection;
      StreamingPredictor predictor(model, params);
      auto f = open_out(ps_out);
      std::size_t emitted = 0;
      for (const auto& s : samples) {
        if (const auto p = predictor.feed(s)) {
          f << json{{"t", p->t},
                    {"x", p->landing.x()},
                    {"y", p->landing.y()},
                    {"alpha", p->alpha},
                    {"flag", p->low_confidence ? "low" : "ok"}}
                   .dump()
            << '\n';
          ++emitted;
        }
      }
      err << emitted << " predictions from " << samples.size() << " samples\n";
      if (ps_latency) {
        StreamingPredictor bench(model, params);
        const LatencyStats st = benchmark_latency(bench, samples, ps_budget);
        err << json{{"samples", st.samples},   {"predictions", st.predictions},
                    {"p50_us", st.p50_us},     {"p99_us", st.p99_us},
                    {"max_us", st.max_us},     {"budget_us", st.budget_us},
                    {"within_budget", st.within_budget}}
                   .dump()
            << '\n';
      }
      return kOk;
    }

    if (synth->parsed()) {
      if (y_out.empty() && y_stream.empty()) throw UsageError("synth needs --out or --stream");
      std::vector<SaccadeTruth> truth;
      if (!y_stream.empty()) {
        const auto saccades = draw_stream_saccades(cfg.synth, y_n);
        SynthStream s = generate_stream(cfg.synth, saccades, y_fix);
        write_gaze_stream(fs::path(y_stream), s.samples);
        truth = std::move(s.truth);
      }
      if (!y_out.empty()) {
        GeneratedCorpus corpus = generate(cfg.synth, y_n);
        Container c;
        c.metadata = {{"command", "synth"}, {"seed", cfg.synth.seed}};
        c.dataset = std::move(corpus.dataset);
        write_container(fs::path(y_out), c);
        if (y_stream.empty()) truth = std::move(corpus.truth);
      }
      if (!y_truth.empty()) {
        auto f = open_out(y_truth);
        for (std::size_t i = 0; i < truth.size(); ++i) f << truth_json(i, truth[i]).dump() << '\n';
      }
      return kOk;
    }

    if (evalc->parsed()) {
      const CategoryLabel label = parse_label(e_label);
      const PredictionModel model = model_from(e_model);
      const SaccadeDataset test = filtered(dataset_from(e_test), label);
      const EvalReport report = evaluate(model, test, cfg.eval.bins);
      if (!e_csv.empty()) {
        auto f = open_out(e_csv);
        write_error_curve_csv(f, {"model"}, {report});
      }
      if (!e_json.empty()) {
        write_json(e_json, to_json(report));
      } else {
        out << to_json(report).dump(2) << '\n';
      }
      return kOk;
    }

    if (sweepc->parsed()) {
      SweepOptions opts = cfg.eval;
      if (o_n->count()) opts.n_values = w_n;
      if (o_reps->count()) opts.reps = w_reps;
      if (w_noreplace) opts.with_replacement = false;
      std::vector<Strategy> strategies;
      for (const auto& s : w_strategies) {
        try {
          strategies.push_back(parse_strategy(s));
        } catch (const Error& e) {
          throw UsageError(e.what());
        }
      }
      const SaccadeDataset train = dataset_from(w_train);
      const SaccadeDataset test = dataset_from(w_test);
      std::optional<SaccadeDataset> base;
      if (!w_base.empty()) base = dataset_from(w_base);
      StrategyContext ctx;
      ctx.base = base ? &*base : nullptr;
      ctx.model = cfg.model;
      ctx.model_shear = cfg.model_shear;
      ctx.data_shear = cfg.data_shear;
      if (!w_model.empty()) ctx.average = model_from(w_model);
      std::vector<std::string> names;
      std::vector<std::vector<SweepPoint>> results;
      for (Strategy s : strategies) {
        if (s != Strategy::Customized && !ctx.base && !(s != Strategy::DataShear && ctx.average)) {
          throw UsageError(std::string(to_string(s)) + " needs --base");
        }
        names.emplace_back(to_string(s));
        results.push_back(sweep(train, test, s, ctx, opts));
        for (const auto& p : results.back()) {
          if (p.failures) {
            err << names.back() << " n=" << p.n_train << ": " << p.failures << " of " << p.reps
                << " reps failed (" << p.errors.front() << ")\n";
          }
        }
      }
      if (w_out.empty()) {
        write_sweep_csv(out, names, results);
      } else {
        auto f = open_out(w_out);
        write_sweep_csv(f, names, results);
      }
      if (!w_json.empty()) {
        json j = json::object();
        for (std::size_t i = 0; i < names.size(); ++i) {
          j[names[i]] = json::array();
          for (const auto& p : results[i]) j[names[i]].push_back(to_json(p));
        }
        write_json(w_json, j);
      }
      return kOk;
    }

    if (plot->parsed()) {
      const CategoryLabel label = parse_label(q_label);
      if (label.is_none()) throw UsageError("--label must name a category");
      Factor factor = label.factor();
      if (!q_factor.empty()) {
        try {
          factor = parse_factor(q_factor);
        } catch (const Error& e) {
          throw UsageError(e.what());
        }
      }
      const SaccadeDataset corpus = dataset_from(q_corpus);
      fs::create_directories(q_dir);

      auto context_for = [&](const SaccadeDataset& base) {
        StrategyContext ctx;
        ctx.base = &base;
        ctx.model = cfg.model;
        ctx.model_shear = cfg.model_shear;
        ctx.data_shear = cfg.data_shear;
        return ctx;
      };
      const std::vector<Strategy> compared = {Strategy::Average, Strategy::ModelShear,
                                              Strategy::DataShear, Strategy::Customized};

      const CategorySplit split = split_category(corpus, label, q_test, cfg.seed);
      StrategyContext ctx = context_for(split.base);
      const SaccadeDataset cal = subsample(split.pool, std::min(q_cal, split.pool.size()), cfg.seed);
      std::vector<std::string> names;
      std::vector<EvalReport> reports;
      for (Strategy s : compared) {
        try {
          reports.push_back(evaluate(adapt(s, cal, ctx), split.test, cfg.eval.bins));
          names.emplace_back(to_string(s));
        } catch (const Error& e) {
          err << "warning: " << to_string(s) << ": " << e.what() << '\n';
        }
      }
      {
        auto f = open_out((fs::path(q_dir) / "direction_shift_error.csv").string());
        write_error_curve_csv(f, names, reports);
      }

      SweepOptions opts = cfg.eval;
      std::erase_if(opts.n_values, [&](std::size_t n) { return n > split.pool.size(); });
      std::vector<std::string> sweep_names;
      std::vector<std::vector<SweepPoint>> sweeps;
      for (Strategy s : {Strategy::Customized, Strategy::ModelShear}) {
        sweep_names.emplace_back(to_string(s));
        sweeps.push_back(sweep(split.pool, split.test, s, ctx, opts));
      }
      {
        auto f = open_out((fs::path(q_dir) / "personalized_vs_model.csv").string());
        write_sweep_csv(f, sweep_names, sweeps);
      }

      std::vector<CategoryLabel> categories;
      for (const auto& p : corpus.profiles()) {
        if (p.category.factor() == factor &&
            std::find(categories.begin(), categories.end(), p.category) == categories.end()) {
          categories.push_back(p.category);
        }
      }
      auto f = open_out((fs::path(q_dir) / "users_shift_error.csv").string());
      f << "category,strategy,mae_full,mae_second_half\n";
      for (const auto& c : categories) {
        std::size_t members = 0;
        for (const auto& p : corpus.profiles()) members += p.category == c;
        const std::size_t n_test = std::min(q_test, members / 2);
        if (n_test == 0) continue;
        try {
          const CategorySplit cs = split_category(corpus, c, n_test, cfg.seed);
          StrategyContext cctx = context_for(cs.base);
          const SaccadeDataset ccal = subsample(cs.pool, std::min(q_cal, cs.pool.size()), cfg.seed);
          for (Strategy s : {Strategy::Average, Strategy::ModelShear, Strategy::DataShear}) {
            const EvalReport r = evaluate(adapt(s, ccal, cctx), cs.test, cfg.eval.bins);
            f << c.str() << ',' << to_string(s) << ',' << r.mae_full << ',' << r.mae_second_half
              << '\n';
          }
        } catch (const Error& e) {
          err << "warning: " << c.str() << ": " << e.what() << '\n';
        }
      }
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
  err << app.help();
  return kUsage;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace sackit::cli
