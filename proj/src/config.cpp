#include "sackit/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include "sackit/error.hpp"

namespace sackit {

namespace {

using nlohmann::json;

// Reads the keys of one JSON object and remembers which ones were asked for,
// so that leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ParseError("config: '" + name_ + "' must be an object");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    known_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) type_error(key, "a boolean");
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!it->is_number_unsigned()) type_error(key, "a non-negative integer");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) type_error(key, "an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) type_error(key, "a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) type_error(key, "a string");
    } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
      if (!it->is_array()) type_error(key, "an array of non-negative integers");
      for (const auto& e : *it) {
        if (!e.is_number_unsigned()) type_error(key, "an array of non-negative integers");
      }
    }
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      type_error(key, "a valid value");
    }
  }

  const json* child(const std::string& key) {
    known_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(const std::string& key) const {
    return name_.empty() ? key : name_ + "." + key;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!known_.count(item.key())) throw ParseError("unknown config key '" + path(item.key()) + "'");
    }
  }

 private:
  [[noreturn]] void type_error(const std::string& key, const char* expected) const {
    throw ParseError("config: '" + path(key) + "' must be " + expected);
  }

  const json& j_;
  std::string name_;
  std::set<std::string> known_;
};

ShearInterpolation parse_interp(const std::string& s) {
  if (s == "cubic") return ShearInterpolation::CubicSpline;
  if (s == "linear") return ShearInterpolation::Linear;
  throw ParseError("config: shear.interpolation must be 'cubic' or 'linear'");
}

std::string interp_name(ShearInterpolation i) {
  return i == ShearInterpolation::Linear ? "linear" : "cubic";
}

}  // namespace

void Config::validate() const {
  detection.validate();
  synth.validate();
  if (!(model.alpha_step > 0.0) || !(model.alpha_min > 0.0) || !(model.alpha_max >= model.alpha_min)) {
    throw StructuralError("config: invalid model amplitude grid");
  }
  if (!(model.window_halfwidth > 0.0)) throw StructuralError("config: model.window_halfwidth must be positive");
  if (model.min_bin_count < 1) throw StructuralError("config: model.min_bin_count must be >= 1");
  for (const ShearFitOptions* fit : {&model_shear.fit, &data_shear.fit}) {
    if (!(fit->tolerance > 0.0)) throw StructuralError("config: shear.tolerance must be positive");
    if (fit->coarse_points < 3) throw StructuralError("config: shear.coarse_points must be >= 3");
  }
  if (!(model_shear.curve.tolerance > 0.0) || model_shear.curve.max_iterations < 1) {
    throw StructuralError("config: invalid shear curve fit settings");
  }
  const DenoiseParams& dn = model_shear.denoise;
  if (dn.median_window < 1 || dn.gaussian_window < 1 || !(dn.gaussian_sigma > 0.0)) {
    throw StructuralError("config: invalid denoise settings");
  }
  if (!(data_shear.alpha_step > 0.0) || !(data_shear.halfwidth > 0.0)) {
    throw StructuralError("config: invalid shear target grid");
  }
  if (eval.reps < 1 || eval.bins < 1 || eval.n_values.empty()) {
    throw StructuralError("config: eval needs reps >= 1, bins >= 1 and at least one n");
  }
  for (auto n : eval.n_values) {
    if (n == 0) throw StructuralError("config: eval.n_values must be positive");
  }
}

Config config_from_json(const json& j, Config c) {
  Section root(j, "");
  root.get("seed", c.seed);

  if (const json* s = root.child("detection")) {
    Section d(*s, "detection");
    d.get("v_detect", c.detection.v_detect);
    d.get("v_anchor", c.detection.v_anchor);
    d.get("pre_anchor_window", c.detection.pre_anchor_window);
    d.get("min_amplitude", c.detection.min_amplitude);
    d.get("max_gap", c.detection.max_gap);
    d.finish();
  }
  if (const json* s = root.child("model")) {
    Section m(*s, "model");
    m.get("alpha_min", c.model.alpha_min);
    m.get("alpha_max", c.model.alpha_max);
    m.get("alpha_step", c.model.alpha_step);
    m.get("window_halfwidth", c.model.window_halfwidth);
    m.get("min_bin_count", c.model.min_bin_count);
    m.finish();
  }
  if (const json* s = root.child("shear")) {
    Section h(*s, "shear");
    ShearFitOptions fit = c.model_shear.fit;
    CurveFitOptions curve = c.model_shear.curve;
    std::string interp = interp_name(fit.interp);
    h.get("tolerance", fit.tolerance);
    h.get("coarse_points", fit.coarse_points);
    h.get("interpolation", interp);
    fit.interp = parse_interp(interp);
    h.get("curve_tolerance", curve.tolerance);
    h.get("curve_max_iterations", curve.max_iterations);
    h.get("denoise_rows", c.model_shear.denoise_rows);
    h.get("median_window", c.model_shear.denoise.median_window);
    h.get("gaussian_window", c.model_shear.denoise.gaussian_window);
    h.get("gaussian_sigma", c.model_shear.denoise.gaussian_sigma);
    h.get("target_step", c.data_shear.alpha_step);
    h.get("target_halfwidth", c.data_shear.halfwidth);
    h.get("min_target_count", c.data_shear.min_target_count);
    h.finish();
    c.model_shear.fit = c.data_shear.fit = fit;
    c.model_shear.curve = c.data_shear.curve = curve;
  }
  if (const json* s = root.child("synth")) {
    Section y(*s, "synth");
    y.get("amplitude_min", c.synth.amplitude_min);
    y.get("amplitude_max", c.synth.amplitude_max);
    y.get("rate_hz", c.synth.rate_hz);
    y.get("noise_sigma", c.synth.noise_sigma);
    y.get("dropout", c.synth.dropout);
    y.get("duration_slope", c.synth.duration_slope);
    y.get("duration_intercept", c.synth.duration_intercept);
    y.get("tau_fraction", c.synth.tau_fraction);
    y.get("shape_exponent", c.synth.shape_exponent);
    if (const json* cats = y.child("categories")) {
      if (!cats->is_array()) throw ParseError("config: 'synth.categories' must be an array");
      c.synth.categories.clear();
      for (const auto& item : *cats) {
        Section cat(item, "synth.categories[]");
        std::string factor = "none";
        std::string value;
        SynthCategory sc;
        cat.get("factor", factor);
        cat.get("value", value);
        cat.get("dilation", sc.dilation);
        cat.get("weight", sc.weight);
        cat.finish();
        try {
          sc.label = CategoryLabel(parse_factor(factor), value);
        } catch (const Error& e) {
          throw ParseError(std::string("config: ") + e.what());
        }
        c.synth.categories.push_back(std::move(sc));
      }
    }
    y.finish();
  }
  if (const json* s = root.child("eval")) {
    Section e(*s, "eval");
    e.get("n_values", c.eval.n_values);
    e.get("reps", c.eval.reps);
    e.get("with_replacement", c.eval.with_replacement);
    e.get("bins", c.eval.bins);
    e.finish();
  }
  root.finish();
  c.synth.seed = c.eval.seed = c.seed;
  return c;
}

json to_json(const Config& c) {
  json cats = json::array();
  for (const auto& sc : c.synth.categories) {
    cats.push_back({{"factor", to_string(sc.label.factor())},
                    {"value", sc.label.value()},
                    {"dilation", sc.dilation},
                    {"weight", sc.weight}});
  }
  return {
      {"seed", c.seed},
      {"detection",
       {{"v_detect", c.detection.v_detect},
        {"v_anchor", c.detection.v_anchor},
        {"pre_anchor_window", c.detection.pre_anchor_window},
        {"min_amplitude", c.detection.min_amplitude},
        {"max_gap", c.detection.max_gap}}},
      {"model",
       {{"alpha_min", c.model.alpha_min},
        {"alpha_max", c.model.alpha_max},
        {"alpha_step", c.model.alpha_step},
        {"window_halfwidth", c.model.window_halfwidth},
        {"min_bin_count", c.model.min_bin_count}}},
      {"shear",
       {{"tolerance", c.model_shear.fit.tolerance},
        {"coarse_points", c.model_shear.fit.coarse_points},
        {"interpolation", interp_name(c.model_shear.fit.interp)},
        {"curve_tolerance", c.model_shear.curve.tolerance},
        {"curve_max_iterations", c.model_shear.curve.max_iterations},
        {"denoise_rows", c.model_shear.denoise_rows},
        {"median_window", c.model_shear.denoise.median_window},
        {"gaussian_window", c.model_shear.denoise.gaussian_window},
        {"gaussian_sigma", c.model_shear.denoise.gaussian_sigma},
        {"target_step", c.data_shear.alpha_step},
        {"target_halfwidth", c.data_shear.halfwidth},
        {"min_target_count", c.data_shear.min_target_count}}},
      {"synth",
       {{"amplitude_min", c.synth.amplitude_min},
        {"amplitude_max", c.synth.amplitude_max},
        {"rate_hz", c.synth.rate_hz},
        {"noise_sigma", c.synth.noise_sigma},
        {"dropout", c.synth.dropout},
        {"duration_slope", c.synth.duration_slope},
        {"duration_intercept", c.synth.duration_intercept},
        {"tau_fraction", c.synth.tau_fraction},
        {"shape_exponent", c.synth.shape_exponent},
        {"categories", cats}}},
      {"eval",
       {{"n_values", c.eval.n_values},
        {"reps", c.eval.reps},
        {"with_replacement", c.eval.with_replacement},
        {"bins", c.eval.bins}}},
  };
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("config " + path.string() + ": " + e.what());
  }
  Config c = config_from_json(j);
  c.validate();
  return c;
}

Config resolve_config(const std::optional<std::filesystem::path>& explicit_path) {
  if (explicit_path) return load_config(*explicit_path);
  if (const char* env = std::getenv(kConfigEnv); env && *env) return load_config(env);
  return {};
}

}  // namespace sackit
