#include "sackit/profiles.hpp"

#include <algorithm>
#include <cmath>

#include "sackit/error.hpp"
#include "sackit/interp.hpp"

namespace sackit {

AmplitudeWindow::AmplitudeWindow(double c, double hw) : center(c), halfwidth(hw) {
  if (!(hw > 0.0)) throw StructuralError("amplitude window halfwidth must be positive");
}

Eigen::VectorXd resample(const Eigen::VectorXd& t, const Eigen::VectorXd& d, double dt) {
  if (t.size() != d.size()) throw StructuralError("resample: t and d lengths differ");
  if (t.size() < 2) throw StructuralError("resample needs at least two points");
  if (!(dt > 0.0)) throw StructuralError("resample: dt must be positive");
  if (t[0] != 0.0) throw StructuralError("resample: first timestamp must be 0");
  for (Eigen::Index i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) throw StructuralError("resample: timestamps not strictly increasing");
  }
  // Small slack keeps a last point at 9.9999999 ms on the 10 ms grid node.
  const auto steps = static_cast<Eigen::Index>(std::floor(t[t.size() - 1] / dt + 1e-9));
  const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(steps + 1, 0.0, dt * double(steps));
  return interp_linear<double>(t, d, grid);
}

std::vector<SaccadeProfile> select(const SaccadeDataset& dataset, const CategoryLabel& label,
                                   const AmplitudeWindow& window) {
  std::vector<SaccadeProfile> out;
  for (const auto& p : dataset.profiles()) {
    if (!p.outlier && p.category.matches(label) && window.contains(p.amplitude())) {
      out.push_back(p);
    }
  }
  return out;
}

MeanProfile mean_profile(std::span<const SaccadeProfile> profiles) {
  if (profiles.empty()) throw StructuralError("mean_profile of an empty set");
  const double dt = profiles.front().dt;
  double end_sum = 0.0;
  double amp_sum = 0.0;
  for (const auto& p : profiles) {
    if (p.dt != dt) throw StructuralError("mean_profile: profiles do not share dt");
    end_sum += p.duration();
    amp_sum += p.amplitude();
  }
  const double n = static_cast<double>(profiles.size());
  const auto last = static_cast<Eigen::Index>(std::llround(end_sum / n / dt));
  const Eigen::Index len = std::max<Eigen::Index>(last + 1, 2);

  MeanProfile m;
  m.dt = dt;
  m.mean = Eigen::VectorXd::Zero(len);
  m.stddev = Eigen::VectorXd::Zero(len);
  m.count = Eigen::VectorXi::Zero(len);
  m.source_count = profiles.size();
  m.category = profiles.front().category;
  for (const auto& p : profiles) {
    if (!(p.category == m.category)) {
      m.category = CategoryLabel::none();
      break;
    }
  }

  // Two-pass per timestamp: mean, then population variance.
  for (Eigen::Index l = 0; l < len; ++l) {
    double sum = 0.0;
    int real = 0;
    for (const auto& p : profiles) {
      const Eigen::Index i = std::min(l, p.size() - 1);
      sum += p.d[i];
      if (l < p.size()) ++real;
    }
    const double mu = sum / n;
    double ss = 0.0;
    for (const auto& p : profiles) {
      const double r = p.d[std::min(l, p.size() - 1)] - mu;
      ss += r * r;
    }
    m.mean[l] = mu;
    m.stddev[l] = std::sqrt(ss / n);
    m.count[l] = real;
  }
  m.mean[0] = 0.0;
  m.mean[len - 1] = amp_sum / n;
  return m;
}

double dissimilarity(std::span<const MeanProfile> means) {
  if (means.size() < 2) throw StructuralError("dissimilarity needs at least two mean profiles");
  Eigen::Index upto = means.front().size();
  for (const auto& m : means) {
    if (m.dt != means.front().dt) throw StructuralError("dissimilarity: means do not share dt");
    upto = std::min(upto, m.size());
  }
  double total = 0.0;
  for (Eigen::Index l = 0; l < upto; ++l) {
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    double spread = 0.0;
    for (const auto& m : means) {
      hi = std::max(hi, m.mean[l]);
      lo = std::min(lo, m.mean[l]);
      spread = std::max(spread, m.stddev[l]);
    }
    const double width = hi - lo;
    if (width == 0.0) continue;
    if (spread == 0.0) {
      throw NumericalError("dissimilarity: positive envelope width with zero deviation at t = " +
                           std::to_string(double(l) * means.front().dt) + " ms");
    }
    total += width / spread;
  }
  return total;
}

}  // namespace sackit
