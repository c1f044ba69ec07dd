#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "sackit/error.hpp"
#include "sackit/eval.hpp"
#include "sackit/model.hpp"
#include "sackit/synth.hpp"

using namespace sackit;
using testing::vec;

namespace {

const PredictionModel& noiseless_model() {
  static const PredictionModel model = [] {
    auto cfg = testing::noiseless();
    return build_model(generate(cfg, 2000).dataset);
  }();
  return model;
}

const PredictionModel& noisy_model() {
  static const PredictionModel model = [] {
    SynthConfig cfg;
    cfg.seed = 4;
    return build_model(generate(cfg, 2000).dataset);
  }();
  return model;
}

Eigen::VectorXd held(const Eigen::VectorXd& v, Eigen::Index n) {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(n, v[v.size() - 1]);
  out.head(std::min(n, v.size())) = v.head(std::min(n, v.size()));
  return out;
}

double max_row_diff(const PredictionModel& a, const PredictionModel& b) {
  REQUIRE(a.alpha_count() == b.alpha_count());
  const Eigen::Index n = std::max(a.time_count(), b.time_count());
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.alpha_count(); ++i) {
    const Eigen::VectorXd ra = held(a.rows.row(i).transpose(), n);
    const Eigen::VectorXd rb = held(b.rows.row(i).transpose(), n);
    worst = std::max(worst, (ra - rb).cwiseAbs().maxCoeff());
  }
  return worst;
}

SaccadeDataset dataset_of(const std::vector<SaccadeProfile>& ps) {
  SaccadeDataset ds;
  for (const auto& p : ps) ds.add(p);
  return ds;
}

}  // namespace

TEST_CASE("copies of one profile give a single row equal to it") {
  const auto p = testing::template_profile(10.0);
  const auto ds = dataset_of(std::vector<SaccadeProfile>(5, p));
  const auto m = build_model(ds, {10.0, 10.0, 1.0, 1.0, 1});
  REQUIRE(m.alpha_count() == 1);
  CHECK((m.rows.row(0).transpose() - p.d).cwiseAbs().maxCoeff() <= 1e-12);
  const auto got = predict(m, 20.0, 3.0);
  CHECK(got.alpha == 10.0);
  CHECK(got.saturated);
}

TEST_CASE("sparse bins are interpolated from their neighbours") {
  std::vector<SaccadeProfile> ps(3, testing::linear_profile(0.5, 20));
  for (int k = 0; k < 3; ++k) ps.push_back(testing::linear_profile(1.0, 20));
  BuildDiagnostics diag;
  const auto m = build_model(dataset_of(ps), {10.0, 20.0, 1.0, 0.5, 1}, &diag);
  REQUIRE(m.alpha_count() == 11);
  CHECK(diag.filled_alphas.size() == 9);
  for (Eigen::Index l = 0; l < m.time_count(); ++l) {
    CHECK(m.rows(5, l) == doctest::Approx(0.75 * l));
  }
  CHECK(predict(m, 10.0, 7.5).alpha == doctest::Approx(15.0));
}

TEST_CASE("unfillable edge bins shrink the range") {
  const std::vector<SaccadeProfile> ps(2, testing::linear_profile(1.0, 20));
  BuildDiagnostics diag;
  const auto m = build_model(dataset_of(ps), {5.0, 45.0, 1.0, 1.0, 1}, &diag);
  CHECK(m.alpha_min == 19.0);
  CHECK(m.alpha_max() == 21.0);
  CHECK_FALSE(diag.warnings.empty());
  CHECK_THROWS_AS(build_model(dataset_of(ps), {5.0, 45.0, 1.0, 1.0, 3}), NumericalError);
  CHECK_THROWS_AS(build_model(SaccadeDataset{}), StructuralError);
}

TEST_CASE("built models are monotone in time and amplitude") {
  for (const auto* m : {&noiseless_model(), &noisy_model()}) {
    CHECK(m->rows.col(0).isZero());
    for (Eigen::Index i = 0; i < m->alpha_count(); ++i) {
      for (Eigen::Index l = 1; l < m->time_count(); ++l) CHECK(m->rows(i, l) >= m->rows(i, l - 1));
    }
    for (Eigen::Index l = 0; l < m->time_count(); ++l) {
      for (Eigen::Index i = 1; i < m->alpha_count(); ++i) CHECK(m->rows(i, l) >= m->rows(i - 1, l));
    }
  }
}

TEST_CASE("predicting a grid point returns its amplitude") {
  const auto& m = noisy_model();
  std::size_t checked = 0;
  for (Eigen::Index l = 1; l < m.time_count(); l += 3) {
    for (Eigen::Index i = 1; i < m.alpha_count(); ++i) {
      if (!(m.rows(i - 1, l) < m.rows(i, l))) continue;
      CHECK(std::abs(predict(m, double(l), m.rows(i, l)).alpha - m.alpha(i)) <= 1e-6);
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("prediction saturates outside the table") {
  const auto& m = noisy_model();
  const auto origin = predict(m, 0.0, 0.0);
  CHECK(origin.alpha == m.alpha_min);
  CHECK(origin.saturated);
  const auto far = predict(m, 500.0, 80.0);
  CHECK(far.alpha == m.alpha_max());
  CHECK(far.saturated);
  const auto low = predict(m, 50.0, -1.0);
  CHECK(low.alpha == m.alpha_min);
  CHECK(low.saturated);
  CHECK_FALSE(predict(m, 60.0, 20.0).saturated);
}

TEST_CASE("prediction is non-decreasing in displacement") {
  const auto& m = noisy_model();
  for (double t : {5.0, 17.5, 40.0, 80.0}) {
    double previous = -1.0;
    for (double d = 0.0; d <= 46.0; d += 0.25) {
      const double a = predict(m, t, d).alpha;
      CHECK(a >= previous);
      previous = a;
    }
  }
}

TEST_CASE("held-out noiseless 15 degree saccade converges") {
  const auto& m = noiseless_model();
  const auto p = testing::template_profile(15.0);
  const Eigen::Index n = p.size();
  double first_quarter = 0.0;
  double last_quarter = 0.0;
  const Eigen::Index q = n / 4;
  for (Eigen::Index l = 1; l < n; ++l) {
    const double err = std::abs(predict(m, double(l), p.d[l]).alpha - 15.0);
    if (l <= q) first_quarter += err / double(q);
    if (l >= n - q) last_quarter += err / double(q);
  }
  CHECK(last_quarter < first_quarter);
  CHECK(std::abs(predict(m, p.duration(), p.amplitude()).alpha - 15.0) <= 0.5);
}

TEST_CASE("recover_profiles returns one profile per row") {
  const auto& m = noisy_model();
  const auto rows = recover_profiles(m);
  REQUIRE(rows.size() == static_cast<std::size_t>(m.alpha_count()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].d[0] == 0.0);
    CHECK(rows[i].size() <= m.time_count());
    CHECK(rows[i].duration() == doctest::Approx(m.durations[static_cast<Eigen::Index>(i)]));
  }
}

TEST_CASE("rebuilding from recovered profiles is idempotent") {
  for (const auto* m : {&noiseless_model(), &noisy_model()}) {
    const auto rebuilt = build_model(dataset_of(recover_profiles(*m)),
                                     {m->alpha_min, m->alpha_max(), m->alpha_step, 0.5, 1});
    CHECK(rebuilt.alpha_min == m->alpha_min);
    CHECK(max_row_diff(rebuilt, *m) <= 1e-6);
  }
}

TEST_CASE("denoising") {
  SUBCASE("a straight line is unchanged") {
    const auto p = testing::linear_profile(0.7, 60);
    CHECK((denoise_profile(p).d - p.d).cwiseAbs().maxCoeff() <= 1e-9);
  }
  SUBCASE("a single spike is removed") {
    const auto p = testing::linear_profile(0.5, 60);
    auto spiked = p;
    spiked.d[20] += 5.0;
    CHECK((denoise_profile(spiked).d - p.d).cwiseAbs().maxCoeff() <= 0.5 + 1e-9);
  }
  SUBCASE("endpoints are pinned") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> noise(0.0, 0.2);
    auto p = testing::template_profile(25.0);
    for (Eigen::Index l = 1; l + 1 < p.size(); ++l) p.d[l] += noise(rng);
    const auto out = denoise_profile(p);
    CHECK(out.d[0] == p.d[0]);
    CHECK(out.amplitude() == p.amplitude());
  }
  SUBCASE("white noise is reduced by at least half") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> noise(0.0, 0.2);
    const auto clean = testing::template_profile(30.0);
    auto noisy = clean;
    for (Eigen::Index l = 1; l + 1 < noisy.size(); ++l) noisy.d[l] += noise(rng);
    const double before = std::sqrt((noisy.d - clean.d).squaredNorm() / double(clean.size()));
    const double after =
        std::sqrt((denoise_profile(noisy).d - clean.d).squaredNorm() / double(clean.size()));
    CHECK(after <= 0.5 * before);
  }
  SUBCASE("short profiles shrink the windows") {
    const auto p = testing::linear_profile(1.0, 3);
    CHECK(denoise_profile(p).size() == 4);
  }
}

TEST_CASE("model shear towards the model's own rows is the identity") {
  const auto& m = noisy_model();
  std::vector<MeanProfile> targets;
  for (const auto& r : recover_profiles(m)) {
    MeanProfile t = mean_profile(std::vector<SaccadeProfile>{r});
    targets.push_back(t);
  }
  for (std::size_t i = 0; i < targets.size(); ++i) targets[i].center = m.alpha(Eigen::Index(i));
  ModelShearOptions opts;
  opts.denoise_rows = false;
  ShearCurve curve;
  const auto same = model_shear(m, targets, opts, &curve);
  CHECK(std::abs(curve.slope) <= 1e-6);
  CHECK(std::abs(curve.intercept) <= 1e-4);
  CHECK(max_row_diff(same, m) <= 1e-3);
}

TEST_CASE("model shear keeps amplitudes and follows slower targets") {
  const auto& m = noiseless_model();
  std::vector<MeanProfile> targets;
  for (double a : {10.0, 20.0, 30.0}) {
    MeanProfile t = mean_profile(std::vector<SaccadeProfile>{testing::template_profile(a, 1.15)});
    t.center = a;
    targets.push_back(t);
  }
  ShearCurve curve;
  const auto slow = model_shear(m, targets, {}, &curve);
  CHECK(curve.fitted_count() == 3);
  CHECK(curve(20.0) > 0.0);
  CHECK(slow.alpha_count() == m.alpha_count());
  const auto last_in = m.rows.col(m.time_count() - 1);
  const auto last_out = slow.rows.col(slow.time_count() - 1);
  CHECK((last_in - last_out).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(slow.time_count() > m.time_count());

  std::vector<MeanProfile> one = {targets[0]};
  CHECK_THROWS_AS(model_shear(m, one), NumericalError);
  std::vector<MeanProfile> outside = {targets[0]};
  outside[0].center = 90.0;
  CHECK_THROWS_AS(model_shear(m, outside), NumericalError);
}

TEST_CASE("data shear") {
  const CategoryLabel h(Factor::Orientation, "horizontal");
  const CategoryLabel u(Factor::User, "U");

  SUBCASE("a target equal to the whole set leaves it unchanged") {
    auto cfg = testing::noiseless();
    const auto corpus = generate(cfg, 400);
    ShearCurve curve;
    const auto out = data_shear(corpus.dataset, h, {}, &curve);
    CHECK(curve.slope == 0.0);
    CHECK(curve.intercept == 0.0);
    REQUIRE(out.size() == corpus.dataset.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out.profiles()[i].d == corpus.dataset.profiles()[i].d);
    }
  }

  SUBCASE("profiles move towards a slower user") {
    auto cfg = testing::noiseless();
    cfg.categories = {{h, 1.0, 0.8}, {u, 1.10, 0.2}};
    const auto corpus = generate(cfg, 3000);
    ShearCurve curve;
    const auto out = data_shear(corpus.dataset, u, {}, &curve);
    CHECK(curve(10.0) > 0.0);
    CHECK(curve(40.0) > 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(std::abs(out.profiles()[i].amplitude() - corpus.dataset.profiles()[i].amplitude()) <=
            1e-6);
    }

    // The pooled mean near 10 deg moves most of the way to the user's mean,
    // and within 0.2 deg of it.
    const AmplitudeWindow window(10.0, 1.0);
    const auto target = mean_profile(select(corpus.dataset, u, window));
    auto gap = [&](const SaccadeDataset& ds) {
      const auto m = mean_profile(select(ds, CategoryLabel::none(), window));
      const Eigen::Index n = std::min(m.size(), target.size());
      return (m.mean.head(n) - target.mean.head(n)).cwiseAbs().maxCoeff();
    };
    CHECK(gap(out) <= 0.5 * gap(corpus.dataset));
    CHECK(gap(out) <= 0.2);

    SaccadeDataset test;
    for (std::size_t i = 0; i < corpus.truth.size(); ++i) {
      if (corpus.truth[i].category == u) test.add(corpus.dataset.profiles()[i]);
    }
    const double before = evaluate(build_model(corpus.dataset), test).mae_second_half;
    const double after = evaluate(build_model(out), test).mae_second_half;
    CHECK(after < before);
  }

  SUBCASE("an absent target is an error") {
    const auto corpus = generate(testing::noiseless(), 50);
    CHECK_THROWS_AS(data_shear(corpus.dataset, u), NumericalError);
  }
}

TEST_CASE("time shift delays every row") {
  const auto& m = noisy_model();
  const auto shifted = time_shifted(m, 10.0);
  CHECK(shifted.time_count() == m.time_count() + 10);
  CHECK(shifted.rows.leftCols(11).isZero());
  for (double t : {12.0, 30.0, 55.5}) {
    for (double d : {2.0, 9.0, 21.0}) {
      CHECK(predict(shifted, t + 10.0, d).alpha == predict(m, t, d).alpha);
    }
  }
  CHECK_THROWS_AS(time_shifted(m, -1.0), StructuralError);
}
