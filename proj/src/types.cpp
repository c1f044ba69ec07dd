#include "sackit/types.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "sackit/error.hpp"

namespace sackit {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool allowed(Factor factor, const std::string& value) {
  auto in = [&](std::initializer_list<std::string_view> names) {
    return std::find(names.begin(), names.end(), value) != names.end();
  };
  switch (factor) {
    case Factor::None:
      return value.empty();
    case Factor::Orientation:
      return in({"horizontal", "vertical"});
    case Factor::Depth:
      return in({"same", "nearer", "farther"});
    case Factor::InitialMovement:
      return in({"static", "same", "opposite"});
    case Factor::User:
      return !value.empty();
    case Factor::Amplitude:
      return in({"-1", "+1"});
  }
  return false;
}

}  // namespace

std::string_view to_string(Factor factor) {
  switch (factor) {
    case Factor::None:
      return "none";
    case Factor::Orientation:
      return "orientation";
    case Factor::Depth:
      return "depth";
    case Factor::InitialMovement:
      return "initial_movement";
    case Factor::User:
      return "user";
    case Factor::Amplitude:
      return "amplitude";
  }
  return "none";
}

Factor parse_factor(std::string_view name) {
  const std::string key = lower(name);
  static constexpr std::array<Factor, 6> all = {Factor::None,           Factor::Orientation,
                                                Factor::Depth,          Factor::InitialMovement,
                                                Factor::User,           Factor::Amplitude};
  for (Factor f : all) {
    if (key == to_string(f)) return f;
  }
  if (key == "initialmovement" || key == "initial-movement") return Factor::InitialMovement;
  if (key == "users") return Factor::User;
  if (key == "orientations") return Factor::Orientation;
  throw ParseError("unknown factor '" + std::string(name) + "'");
}

CategoryLabel::CategoryLabel(Factor factor, std::string value)
    : factor_(factor), value_(factor == Factor::User ? std::move(value) : lower(value)) {
  if (!allowed(factor_, value_)) {
    throw StructuralError("invalid category '" + value_ + "' for factor " +
                          std::string(to_string(factor_)));
  }
}

bool CategoryLabel::matches(const CategoryLabel& filter) const {
  return filter.is_none() || filter == *this;
}

std::string CategoryLabel::str() const {
  if (is_none()) return "none";
  return std::string(to_string(factor_)) + ":" + value_;
}

void validate(const SaccadeProfile& p) {
  if (!(p.dt > 0.0) || !std::isfinite(p.dt)) throw StructuralError("profile dt must be positive");
  if (p.d.size() < 2) throw StructuralError("profile needs at least two samples");
  if (p.d[0] != 0.0) throw StructuralError("profile must start at d = 0");
  if (!p.d.allFinite() || !p.lead.allFinite()) {
    throw StructuralError("profile holds non-finite displacement");
  }
  if (!(p.amplitude() > 0.0)) throw StructuralError("profile amplitude must be positive");
}

void validate(const MeanProfile& p) {
  if (!(p.dt > 0.0)) throw StructuralError("mean profile dt must be positive");
  const Eigen::Index n = p.mean.size();
  if (n < 1 || p.stddev.size() != n || p.count.size() != n) {
    throw StructuralError("mean profile arrays have inconsistent lengths");
  }
  if (p.mean[0] != 0.0) throw StructuralError("mean profile must start at 0");
  if (!p.mean.allFinite() || !p.stddev.allFinite() || (p.stddev.array() < 0.0).any()) {
    throw StructuralError("mean profile holds invalid statistics");
  }
  if ((p.count.array() < 1).any()) throw StructuralError("mean profile count below 1");
}

void SaccadeDataset::add(SaccadeProfile profile) {
  validate(profile);
  if (!profiles_.empty() && profile.dt != profiles_.front().dt) {
    throw StructuralError("profile dt differs from dataset dt");
  }
  profiles_.push_back(std::move(profile));
}

}  // namespace sackit
