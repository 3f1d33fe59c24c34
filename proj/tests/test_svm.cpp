#include <cstdio>
#include <filesystem>
#include <random>

#include "doctest.h"

#include "gazeintent/errors.hpp"
#include "gazeintent/svm.hpp"
#include "oracles/dual_qp.hpp"

using namespace gazeintent;

namespace {

std::vector<TrainingExample> two_points() { return {{{-1.0, 0.0}, 0}, {{1.0, 0.0}, 1}}; }

std::vector<TrainingExample> xor_set() {
  return {{{0.0, 0.0}, 0}, {{1.0, 1.0}, 0}, {{0.0, 1.0}, 1}, {{1.0, 0.0}, 1}};
}

// Linearly separable blobs around (+-shift, ...) in `dim` dimensions.
std::vector<TrainingExample> blobs(std::size_t n, std::size_t dim, double shift, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.3);
  std::vector<TrainingExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    int label = static_cast<int>(i % 2);
    std::vector<double> x(dim);
    for (auto& v : x) v = g(rng);
    x[0] += label == 1 ? shift : -shift;
    out.push_back({x, label});
  }
  return out;
}

oracle::KernelFn oracle_kernel(const SvmModel& m) {
  if (m.params.kernel == KernelType::Linear) return [](const oracle::Vec& a, const oracle::Vec& b) { return oracle::linear(a, b); };
  double g = m.params.gamma;
  return [g](const oracle::Vec& a, const oracle::Vec& b) { return oracle::rbf(a, b, g); };
}

void unpack(const std::vector<TrainingExample>& d, std::vector<oracle::Vec>& x, std::vector<int>& y) {
  for (const auto& e : d) {
    x.push_back(e.features);
    y.push_back(e.label);
  }
}

}  // namespace

TEST_CASE("two-point linear problem has the analytic solution") {
  SvmParams p;
  p.kernel = KernelType::Linear;
  p.c = 1.0;
  auto r = train_smo_detailed(two_points(), p, 0);
  std::vector<double> origin{0.0, 0.0};
  CHECK(std::abs(decision_value(r.model, origin)) < 1e-12);
  std::vector<double> sv_neg{-1.0, 0.0};
  std::vector<double> sv_pos{1.0, 0.0};
  CHECK(std::abs(decision_value(r.model, sv_pos) - 1.0) < 1e-6);
  CHECK(std::abs(decision_value(r.model, sv_neg) + 1.0) < 1e-6);
  CHECK(r.alpha[0] == doctest::Approx(0.5));
  CHECK(r.alpha[1] == doctest::Approx(0.5));
  // W = sum a - 1/2 |w|^2 = 1 - 1/2
  CHECK(r.dual_objective == doctest::Approx(0.5));
}

TEST_CASE("linear decision value is affine") {
  SvmParams p;
  p.kernel = KernelType::Linear;
  auto m = train_smo(blobs(30, 3, 1.0, 8), p, 1);
  std::vector<double> a{0.1, 0.2, 0.3};
  std::vector<double> b{0.5, -0.2, 0.9};
  std::vector<double> mid{0.3, 0.0, 0.6};
  CHECK(decision_value(m, mid) == doctest::Approx(0.5 * (decision_value(m, a) + decision_value(m, b))));
}

TEST_CASE("XOR with RBF kernel: all points correct and matches the QP oracle") {
  SvmParams p;
  p.kernel = KernelType::Rbf;
  p.gamma = 1.0;
  p.c = 10.0;
  auto data = xor_set();
  auto r = train_smo_detailed(data, p, 3);
  for (const auto& e : data) CHECK((decision_value(r.model, e.features) > 0.0) == (e.label == 1));

  std::vector<oracle::Vec> x;
  std::vector<int> y;
  unpack(data, x, y);
  auto o = oracle::solve(x, y, 10.0, oracle_kernel(r.model));
  CHECK(std::abs(o.objective - r.dual_objective) < 1e-4);
  CHECK(kkt_audit(r, data, 1e-3).ok(1e-3));
}

TEST_CASE("property: SMO matches the projected-gradient oracle on small problems") {
  std::mt19937_64 rng(2024);
  for (int rep = 0; rep < 12; ++rep) {
    std::size_t n = 6 + rng() % 15;
    std::size_t dim = 2 + rng() % 4;
    bool rbf = rep % 2 == 0;
    std::vector<TrainingExample> data;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> f(dim);
      for (auto& v : f) v = u(rng);
      int label = f[0] + 0.3 * f[1] + 0.2 * (u(rng) - 0.5) > 0.65 ? 1 : 0;
      data.push_back({f, label});
    }
    data[0].label = 0;
    data[1].label = 1;
    SvmParams p;
    p.kernel = rbf ? KernelType::Rbf : KernelType::Linear;
    p.gamma = rbf ? 2.0 : 0.0;
    p.c = (rep % 3 == 0) ? 10.0 : 1.0;
    auto r = train_smo_detailed(data, p, static_cast<std::uint64_t>(rep));

    std::vector<oracle::Vec> x;
    std::vector<int> y;
    unpack(data, x, y);
    auto k = oracle_kernel(r.model);
    auto o = oracle::solve(x, y, p.c, k);
    INFO("rep " << rep << " n=" << n << " dim=" << dim);
    CHECK(std::abs(o.objective - r.dual_objective) <= 1e-4);

    auto audit = kkt_audit(r, data, 1e-3);
    CHECK(audit.ok(1e-3));
    CHECK(audit.equality_residual <= 1e-8 * audit.alpha_sum);
    for (double a : r.alpha) {
      CHECK(a >= 0.0);
      CHECK(a <= p.c);
    }
  }
}

TEST_CASE("training is deterministic under a seed") {
  auto data = blobs(60, 4, 0.3, 12);
  SvmParams p;
  auto a = train_smo(data, p, 77);
  auto b = train_smo(data, p, 77);
  CHECK(a == b);
}

TEST_CASE("training errors") {
  SvmParams p;
  std::vector<TrainingExample> one_class{{{0.0}, 1}, {{1.0}, 1}};
  CHECK_THROWS_AS((void)train_smo(one_class, p, 0), DegenerateDataError);
  std::vector<TrainingExample> ragged{{{0.0, 1.0}, 1}, {{1.0}, 0}};
  CHECK_THROWS_AS((void)train_smo(ragged, p, 0), DimensionMismatchError);
  CHECK_THROWS_AS((void)train_smo({}, p, 0), DegenerateDataError);
  SvmParams bad;
  bad.c = 0.0;
  CHECK_THROWS_AS((void)train_smo(two_points(), bad, 0), ConfigError);

  auto m = train_smo(two_points(), p, 0);
  std::vector<double> wrong{1.0, 2.0, 3.0};
  CHECK_THROWS_AS((void)decision_value(m, wrong), DimensionMismatchError);
}

TEST_CASE("sigmoid probabilities") {
  CHECK(platt_probability(0.0, -1.0, 0.0) == 0.5);
  double p = platt_probability(50.0, -1.0, 0.0);
  CHECK(p >= 1.0 - 1e-9);
  CHECK(p < 1.0);
  double q = platt_probability(-800.0, -1.0, 0.0);
  CHECK(q > 0.0);
  double prev = 0.0;
  for (double f = -5.0; f <= 5.0; f += 0.25) {
    double v = platt_probability(f, -1.3, 0.2);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("Platt fit on a separated holdout orients with the decision value") {
  auto data = blobs(200, 3, 0.6, 5);
  std::vector<TrainingExample> train(data.begin(), data.begin() + 140);
  std::vector<TrainingExample> hold(data.begin() + 140, data.end());
  SvmParams p;
  auto m = train_smo(train, p, 1);
  CHECK_THROWS_AS((void)predict_proba(m, hold[0].features), UncalibratedModelError);
  auto cal = fit_platt(m, hold);
  CHECK(cal.calibrated);
  CHECK(cal.platt_a < 0.0);
  std::vector<std::pair<double, double>> fp;
  for (const auto& e : hold) fp.emplace_back(decision_value(cal, e.features), predict_proba(cal, e.features));
  std::sort(fp.begin(), fp.end());
  for (std::size_t i = 1; i < fp.size(); ++i) CHECK(fp[i].second >= fp[i - 1].second);
  for (const auto& [f, prob] : fp) {
    CHECK(prob > 0.0);
    CHECK(prob < 1.0);
  }

  std::vector<TrainingExample> single{hold[0], hold[2]};
  single[1].label = single[0].label;
  CHECK_THROWS_AS((void)fit_platt(m, single), DegenerateDataError);
}

TEST_CASE("stratified folds") {
  std::vector<int> labels(100);
  for (int i = 0; i < 100; ++i) labels[i] = i < 30 ? 1 : 0;
  auto folds = stratified_folds(labels, 5, 9);
  std::vector<int> size(5, 0);
  std::vector<int> pos(5, 0);
  for (int i = 0; i < 100; ++i) {
    size[folds[i]]++;
    pos[folds[i]] += labels[i];
  }
  for (int f = 0; f < 5; ++f) {
    CHECK(size[f] == 20);
    CHECK(pos[f] == 6);
  }
  CHECK(stratified_folds(labels, 5, 9) == folds);
  CHECK_FALSE(stratified_folds(labels, 5, 10) == folds);

  std::vector<int> odd(23, 0);
  for (int i = 0; i < 7; ++i) odd[i] = 1;
  auto f2 = stratified_folds(odd, 5, 1);
  std::vector<int> s2(5, 0);
  for (int f : f2) s2[f]++;
  CHECK(*std::max_element(s2.begin(), s2.end()) - *std::min_element(s2.begin(), s2.end()) <= 1);
}

TEST_CASE("cross-validation on trivially separable data is perfect") {
  auto data = blobs(100, 3, 2.0, 3);
  SvmParams p;
  auto rep = cross_validate(data, 5, p, 11);
  CHECK(rep.k == 5);
  CHECK(rep.per_fold_accuracy.size() == 5);
  CHECK(rep.mean_accuracy == 1.0);
  auto again = cross_validate(data, 5, p, 11);
  CHECK(again.per_fold_accuracy == rep.per_fold_accuracy);
}

TEST_CASE("grid search reports every cell and picks the best") {
  auto data = blobs(80, 4, 0.25, 4);
  SvmParams p;
  auto g = grid_search(data, 5, p, 2);
  CHECK(g.entries.size() == 9);
  for (const auto& e : g.entries) CHECK(e.accuracy <= g.best_accuracy);
  CHECK(g.best.gamma > 0.0);
}

TEST_CASE("model json round trip reproduces decision values") {
  auto data = blobs(60, 5, 0.4, 21);
  SvmParams p;
  auto m = train_calibrated(data, p, 3);
  auto path = (std::filesystem::temp_directory_path() / "gazeintent_model_test.json").string();
  save_model(m, path);
  auto back = load_model(path);
  std::remove(path.c_str());
  CHECK(back == m);
  CHECK(model_hash(back) == model_hash(m));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> x(5);
    for (auto& v : x) v = u(rng);
    CHECK(std::abs(decision_value(back, x) - decision_value(m, x)) <= 1e-12);
    CHECK(predict_proba(back, x) == predict_proba(m, x));
  }
  CHECK_THROWS_AS((void)load_model("/nonexistent/model.json"), ModelLoadError);
  auto j = model_to_json(m);
  j["version"] = 7;
  CHECK_THROWS_AS((void)model_from_json(j), VersionError);
}
