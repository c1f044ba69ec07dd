#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "sackit/error.hpp"
#include "sackit/profiles.hpp"
#include "sackit/shear.hpp"

using namespace sackit;
using testing::vec;

namespace {

double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index n = std::max(a.size(), b.size());
  double worst = 0.0;
  for (Eigen::Index l = 0; l < n; ++l) {
    worst = std::max(worst, std::abs(a[std::min(l, a.size() - 1)] - b[std::min(l, b.size() - 1)]));
  }
  return worst;
}

// Optimal weighted-L1 line by enumeration: some optimum passes through two
// points with distinct alphas.
double pair_oracle(const std::vector<ShearPoint>& pts) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (pts[i].alpha == pts[j].alpha) continue;
      const double a = (pts[j].lambda - pts[i].lambda) / (pts[j].alpha - pts[i].alpha);
      const double b = pts[i].lambda - a * pts[i].alpha;
      best = std::min(best, shear_curve_objective(a, b, pts));
    }
  }
  return best;
}

double grid_oracle(const std::vector<ShearPoint>& pts, double step) {
  double best = std::numeric_limits<double>::infinity();
  for (double a = -0.1; a <= 0.1 + 1e-12; a += step / 10.0) {
    for (double b = -1.5; b <= 1.5 + 1e-12; b += step) {
      best = std::min(best, shear_curve_objective(a, b, pts));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("shear factor range") {
  CHECK_NOTHROW(ShearFactor(1.0));
  CHECK_NOTHROW(ShearFactor(-1.0));
  CHECK_THROWS_AS(ShearFactor(1.01), StructuralError);
  CHECK_THROWS_AS(ShearFactor(NAN), StructuralError);
}

TEST_CASE("zero shear is an exact identity") {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 10; ++k) {
    const auto p = testing::random_smooth_profile(rng);
    CHECK(shear(p, ShearFactor(0.0)).d == p.d);
    CHECK(shear(p, ShearFactor(0.0), ShearInterpolation::Linear).d == p.d);
  }
}

TEST_CASE("shear of a line has the closed-form slope") {
  const auto p = testing::linear_profile(1.0, 40);
  for (auto interp : {ShearInterpolation::CubicSpline, ShearInterpolation::Linear}) {
    const auto s = shear(p, ShearFactor(0.5), interp);
    REQUIRE(s.size() == 61);
    for (Eigen::Index l = 0; l < s.size(); ++l) {
      CHECK(s.d[l] == doctest::Approx(l / 1.5).epsilon(1e-12));
    }
  }
  const auto back = shear(p, ShearFactor(-0.5));
  CHECK(back.size() == 21);
  CHECK(back.d[10] == doctest::Approx(20.0));
}

TEST_CASE("shear keeps the amplitude and moves the end") {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 20; ++k) {
    const auto p = testing::random_smooth_profile(rng);
    for (double lambda : {-0.4, -0.1, 0.3, 0.8}) {
      const auto s = shear(p, ShearFactor(lambda));
      CHECK(std::abs(s.amplitude() - p.amplitude()) <= 1e-6);
      CHECK(s.d[0] == 0.0);
      CHECK(s.size() == static_cast<Eigen::Index>(std::ceil(p.duration() + lambda * p.amplitude() - 1e-9)) + 1);
    }
  }
}

TEST_CASE("shears compose additively") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  double worst = 0.0;
  for (int k = 0; k < 30; ++k) {
    const auto p = testing::random_smooth_profile(rng);
    const double a = u(rng);
    const double b = u(rng);
    const auto twice = shear(shear(p, ShearFactor(a)), ShearFactor(b));
    const auto once = shear(p, ShearFactor(a + b));
    worst = std::max(worst, max_abs_diff(twice.d, once.d));
  }
  CHECK(worst <= 1e-3);
}

TEST_CASE("steep negative shear is non-invertible") {
  Eigen::VectorXd d = vec({0, 0.1, 3.0, 3.1});
  CHECK_THROWS_AS(shear_curve(d, 1.0, ShearFactor(-0.5)), NumericalError);
  CHECK(std::isinf(shear_objective(d, d, 1.0, -0.5)));
}

TEST_CASE("mean profile shear follows the same time map") {
  const auto p = testing::template_profile(20.0);
  std::vector<SaccadeProfile> ps = {p, testing::template_profile(21.0)};
  const MeanProfile m = mean_profile(ps);
  const MeanProfile s = shear(m, ShearFactor(0.3));
  CHECK(s.mean == shear_curve(m.mean, 1.0, ShearFactor(0.3)));
  CHECK(s.stddev.size() == s.mean.size());
  CHECK(s.count.minCoeff() >= 1);
  CHECK(s.stddev.minCoeff() >= 0.0);
  CHECK(s.amplitude() == m.amplitude());
}

TEST_CASE("fit_shear recovers known shears") {
  const auto p = testing::template_profile(20.0);
  CHECK(std::abs(fit_shear(p.d, p.d, 1.0).lambda) <= 1e-4);
  for (double lambda : {-0.5, -0.2, 0.2, 0.3, 0.5}) {
    const auto target = shear(p, ShearFactor(lambda));
    CHECK(std::abs(fit_shear(p.d, target.d, 1.0).lambda - lambda) <= 1e-3);
  }
}

TEST_CASE("fit_shear sign follows dilation, checked against a dense scan") {
  for (double alpha : {10.0, 25.0, 40.0}) {
    const auto base = testing::template_profile(alpha);
    const auto slow = testing::template_profile(alpha, 1.15);
    const auto fast = testing::template_profile(alpha, 0.9);
    const double l_slow = fit_shear(base.d, slow.d, 1.0).lambda;
    const double l_fast = fit_shear(base.d, fast.d, 1.0).lambda;
    CHECK(l_slow > 0.0);
    CHECK(l_fast < 0.0);
    // Oracle: direct objective scan on a 1e-3 grid.
    for (auto [target, got] : {std::pair{&slow, l_slow}, std::pair{&fast, l_fast}}) {
      double best_l = 0.0;
      double best_v = std::numeric_limits<double>::infinity();
      for (int i = -1000; i <= 1000; ++i) {
        const double v = shear_objective(base.d, target->d, 1.0, i * 1e-3);
        if (v < best_v) {
          best_v = v;
          best_l = i * 1e-3;
        }
      }
      CHECK(std::abs(got - best_l) <= 2e-3);
      CHECK(shear_objective(base.d, target->d, 1.0, got) <= best_v + 1e-9);
    }
  }
}

TEST_CASE("fit_shear flags a flat objective") {
  // Zero displacement is not moved by any shear.
  const auto fit = fit_shear(vec({0, 0, 0}), vec({0, 0}), 1.0);
  CHECK(fit.flat);
  CHECK(fit.lambda == 0.0);
  CHECK_THROWS_AS(fit_shear(vec({0, NAN}), vec({0, 1}), 1.0), NumericalError);
}

TEST_CASE("fit_shear on mean profiles uses the mean curves") {
  const auto p = testing::template_profile(15.0);
  const MeanProfile a = mean_profile(std::vector<SaccadeProfile>{p});
  const MeanProfile b = mean_profile(std::vector<SaccadeProfile>{shear(p, ShearFactor(0.25))});
  CHECK(std::abs(fit_shear(a, b).lambda - 0.25) <= 1e-3);
}

TEST_CASE("shear curve evaluation clamps") {
  ShearCurve c;
  c.slope = 0.1;
  c.intercept = -2.0;
  CHECK(c(5.0) == doctest::Approx(-1.0));
  CHECK(c(15.0) == doctest::Approx(-0.5));
  CHECK(c(100.0) == doctest::Approx(1.0));
  CHECK(c.at(100.0).value() == 1.0);
}

TEST_CASE("fit_shear_curve examples") {
  SUBCASE("collinear points") {
    std::vector<ShearPoint> pts = {{5, 0.1, 3}, {10, 0.2, 1}, {20, 0.4, 7}, {30, 0.6, 2}};
    const auto c = fit_shear_curve(pts);
    CHECK(c.slope == doctest::Approx(0.02));
    CHECK(c.intercept == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(shear_curve_objective(c.slope, c.intercept, pts) <= 1e-12);
    CHECK(c.fitted_count() == 4);
  }
  SUBCASE("outlier with a huge count barely matters") {
    std::vector<ShearPoint> pts = {{10, 0.1, 1}, {20, 0.2, 1}, {30, 0.3, 1}, {25, 0.9, 100000}};
    const auto c = fit_shear_curve(pts);
    CHECK(c.slope == doctest::Approx(0.01));
    CHECK(c.intercept == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(shear_curve_objective(c.slope, c.intercept, pts) <= grid_oracle(pts, 1e-3) + 1e-6);
  }
  SUBCASE("two points give the line through them") {
    std::vector<ShearPoint> pts = {{10, -0.2, 4}, {30, 0.2, 9}};
    const auto c = fit_shear_curve(pts);
    CHECK(c.slope == doctest::Approx(0.02));
    CHECK(c.intercept == doctest::Approx(-0.4));
  }
  SUBCASE("one distinct amplitude is degenerate") {
    std::vector<ShearPoint> pts = {{10, -0.2, 4}, {10, 0.2, 9}};
    CHECK_THROWS_AS(fit_shear_curve(pts), NumericalError);
    CHECK_THROWS_AS(fit_shear_curve(std::vector<ShearPoint>{}), StructuralError);
  }
}

TEST_CASE("fit_shear_curve reaches the weighted L1 optimum") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> alpha(5.0, 45.0);
  std::uniform_real_distribution<double> lam(-0.6, 0.6);
  std::uniform_int_distribution<int> count(1, 40);
  std::uniform_int_distribution<int> size(2, 10);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ShearPoint> pts;
    const int n = size(rng);
    for (int i = 0; i < n; ++i) {
      pts.push_back({std::round(alpha(rng)), lam(rng), static_cast<std::size_t>(count(rng))});
    }
    bool distinct = false;
    for (const auto& p : pts) distinct |= p.alpha != pts[0].alpha;
    if (!distinct) continue;
    const auto c = fit_shear_curve(pts);
    const double got = shear_curve_objective(c.slope, c.intercept, pts);
    CHECK(got <= pair_oracle(pts) + 1e-9);
    CHECK(got >= pair_oracle(pts) - 1e-9);
    // Deterministic for a fixed input order.
    const auto again = fit_shear_curve(pts);
    CHECK(again.slope == c.slope);
    CHECK(again.intercept == c.intercept);
  }
}
