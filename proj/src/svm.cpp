#include "gazeintent/svm.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "gazeintent/errors.hpp"
#include "gazeintent/hash.hpp"

namespace gazeintent {

void SvmParams::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("svm C must be positive");
  if (gamma < 0.0 || !std::isfinite(gamma)) throw ConfigError("svm gamma must be positive (or 0 for 1/dim)");
  if (!(tol > 0.0)) throw ConfigError("svm tol must be positive");
  if (max_iterations < 1) throw ConfigError("svm max_iterations must be positive");
}

Kernel SvmParams::kernel_for_dim(std::size_t dim) const {
  double g = gamma > 0.0 ? gamma : 1.0 / static_cast<double>(std::max<std::size_t>(dim, 1));
  return {kernel, g};
}

namespace {

constexpr double kTau = 1e-12;

// Kernel entries of a subset of rows of a precomputed full Gram matrix.
struct GramView {
  const double* data = nullptr;
  std::size_t stride = 0;
  std::span<const std::size_t> index;

  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const {
    return data[index[i] * stride + index[j]];
  }
  [[nodiscard]] std::size_t size() const { return index.size(); }
};

struct DualSolution {
  std::vector<double> alpha;
  std::vector<double> grad;
  double rho = 0.0;
  long iterations = 0;
};

// Maximal-violating-pair SMO with second-order working set selection on
//   min 1/2 a'Qa - e'a   s.t. 0 <= a <= C, y'a = 0,   Q_ij = y_i y_j K_ij.
// `order` fixes the scan order used for tie-breaking in pair selection.
DualSolution solve_dual(const GramView& k, std::span<const int> y, double c, double tol, long max_iter,
                        std::span<const std::size_t> order) {
  const std::size_t n = k.size();
  DualSolution s;
  s.alpha.assign(n, 0.0);
  s.grad.assign(n, -1.0);
  auto& a = s.alpha;
  auto& g = s.grad;

  auto upper = [&](std::size_t t) { return a[t] >= c; };
  auto lower = [&](std::size_t t) { return a[t] <= 0.0; };

  while (s.iterations < max_iter) {
    // i maximizes -y_t G_t over I_up.
    double gmax = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t gmax_idx = -1;
    for (std::size_t t : order) {
      if (y[t] == 1) {
        if (!upper(t) && -g[t] >= gmax) {
          gmax = -g[t];
          gmax_idx = static_cast<std::ptrdiff_t>(t);
        }
      } else if (!lower(t) && g[t] >= gmax) {
        gmax = g[t];
        gmax_idx = static_cast<std::ptrdiff_t>(t);
      }
    }

    double gmax2 = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t gmin_idx = -1;
    double obj_diff_min = std::numeric_limits<double>::infinity();
    if (gmax_idx >= 0) {
      const auto i = static_cast<std::size_t>(gmax_idx);
      const double kii = k(i, i);
      for (std::size_t j : order) {
        double grad_diff;
        if (y[j] == 1) {
          if (lower(j)) continue;
          grad_diff = gmax + g[j];
          gmax2 = std::max(gmax2, g[j]);
        } else {
          if (upper(j)) continue;
          grad_diff = gmax - g[j];
          gmax2 = std::max(gmax2, -g[j]);
        }
        if (grad_diff > 0.0) {
          double quad = kii + k(j, j) - 2.0 * k(i, j);
          double obj_diff = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
          if (obj_diff <= obj_diff_min) {
            gmin_idx = static_cast<std::ptrdiff_t>(j);
            obj_diff_min = obj_diff;
          }
        }
      }
    }
    if (gmax_idx < 0 || gmin_idx < 0 || gmax + gmax2 < tol) break;
    ++s.iterations;

    const auto i = static_cast<std::size_t>(gmax_idx);
    const auto j = static_cast<std::size_t>(gmin_idx);
    const double kij = k(i, j);
    const double old_ai = a[i];
    const double old_aj = a[j];

    if (y[i] != y[j]) {
      double quad = k(i, i) + k(j, j) - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      double delta = (-g[i] - g[j]) / quad;
      double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0.0) {
        if (a[j] < 0.0) {
          a[j] = 0.0;
          a[i] = diff;
        }
      } else if (a[i] < 0.0) {
        a[i] = 0.0;
        a[j] = -diff;
      }
      if (diff > 0.0) {
        if (a[i] > c) {
          a[i] = c;
          a[j] = c - diff;
        }
      } else if (a[j] > c) {
        a[j] = c;
        a[i] = c + diff;
      }
    } else {
      double quad = k(i, i) + k(j, j) - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      double delta = (g[i] - g[j]) / quad;
      double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > c) {
        if (a[i] > c) {
          a[i] = c;
          a[j] = sum - c;
        }
      } else if (a[j] < 0.0) {
        a[j] = 0.0;
        a[i] = sum;
      }
      if (sum > c) {
        if (a[j] > c) {
          a[j] = c;
          a[i] = sum - c;
        }
      } else if (a[i] < 0.0) {
        a[i] = 0.0;
        a[j] = sum;
      }
    }

    const double dai = a[i] - old_ai;
    const double daj = a[j] - old_aj;
    const double yi = y[i];
    const double yj = y[j];
    for (std::size_t t = 0; t < n; ++t) {
      const double yt = y[t];
      g[t] += yt * (yi * k(i, t) * dai + yj * k(j, t) * daj);
    }
  }

  // rho: mean of y_i G_i over free vectors, else midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t nr_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    double yg = y[t] * g[t];
    if (upper(t)) {
      if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++nr_free;
      sum_free += yg;
    }
  }
  s.rho = nr_free > 0 ? sum_free / static_cast<double>(nr_free) : (ub + lb) / 2.0;
  return s;
}

void check_dataset(std::span<const TrainingExample> data) {
  if (data.empty()) throw DegenerateDataError("training set is empty");
  const std::size_t dim = data.front().features.size();
  bool pos = false;
  bool neg = false;
  for (const auto& ex : data) {
    if (ex.features.size() != dim) throw DimensionMismatchError("training vectors differ in dimension");
    for (double v : ex.features) {
      if (!std::isfinite(v)) throw DataError("training vector has a non-finite entry");
    }
    if (ex.label == 1) pos = true; else if (ex.label == 0) neg = true;
    else throw DataError("labels must be 0 or 1");
  }
  if (!pos || !neg) throw DegenerateDataError("training set needs both labels");
}

FeatureMatrix to_matrix(std::span<const TrainingExample> data) {
  FeatureMatrix m(data.front().features.size());
  m.reserve(data.size());
  for (const auto& ex : data) m.push_back(ex.features);
  return m;
}

std::vector<int> signed_labels(std::span<const TrainingExample> data, std::span<const std::size_t> index) {
  std::vector<int> y(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) y[i] = data[index[i]].label == 1 ? 1 : -1;
  return y;
}

std::vector<std::size_t> scan_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

// Solves on the rows `index` of a full Gram matrix and assembles the model.
SmoResult solve_subset(std::span<const TrainingExample> data, std::span<const double> gram,
                       std::span<const std::size_t> index, const SvmParams& params, const Kernel& kernel,
                       std::uint64_t seed) {
  GramView view{gram.data(), data.size(), index};
  auto y = signed_labels(data, index);
  auto order = scan_order(index.size(), seed);
  auto sol = solve_dual(view, y, params.c, params.tol, params.max_iterations, order);

  SmoResult r;
  r.alpha = sol.alpha;
  r.iterations = sol.iterations;
  double obj = 0.0;
  for (std::size_t t = 0; t < index.size(); ++t) obj += sol.alpha[t] * (sol.grad[t] - 1.0);
  r.dual_objective = -0.5 * obj;

  SvmModel& m = r.model;
  m.params = params;
  m.params.gamma = kernel.gamma;
  m.support_vectors = FeatureMatrix(data.front().features.size());
  for (std::size_t t = 0; t < index.size(); ++t) {
    if (sol.alpha[t] > 0.0) {
      m.support_vectors.push_back(data[index[t]].features);
      m.alphas_signed.push_back(sol.alpha[t] * y[t]);
    }
  }
  m.bias = -sol.rho;
  return r;
}

// Decision value of a subset-trained solution at row `q` of the full Gram matrix.
double gram_decision(std::span<const double> gram, std::size_t stride, std::span<const std::size_t> index,
                     const SmoResult& r, std::span<const int> y, std::size_t q) {
  double s = 0.0;
  for (std::size_t t = 0; t < index.size(); ++t) {
    if (r.alpha[t] > 0.0) s += r.alpha[t] * y[t] * gram[index[t] * stride + q];
  }
  return s + r.model.bias;
}

std::vector<int> plain_labels(std::span<const TrainingExample> data) {
  std::vector<int> l(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) l[i] = data[i].label;
  return l;
}

}  // namespace

SmoResult train_smo_detailed(std::span<const TrainingExample> data, const SvmParams& params, std::uint64_t seed) {
  params.validate();
  check_dataset(data);
  const Kernel kernel = params.kernel_for_dim(data.front().features.size());
  const auto gram = kernel_matrix(to_matrix(data), kernel);
  std::vector<std::size_t> index(data.size());
  std::iota(index.begin(), index.end(), 0);
  return solve_subset(data, gram, index, params, kernel, seed);
}

SvmModel train_smo(std::span<const TrainingExample> data, const SvmParams& params, std::uint64_t seed) {
  return train_smo_detailed(data, params, seed).model;
}

double decision_value(const SvmModel& model, std::span<const double> x) {
  if (x.size() != model.dim()) throw DimensionMismatchError("feature vector dimension differs from model");
  const Kernel k = model.kernel();
  double s = 0.0;
  for (std::size_t j = 0; j < model.support_vectors.rows(); ++j) {
    s += model.alphas_signed[j] * k(model.support_vectors.row(j), x);
  }
  return s + model.bias;
}

double platt_probability(double decision, double a, double b) {
  const double f = a * decision + b;
  double p = f >= 0.0 ? std::exp(-f) / (1.0 + std::exp(-f)) : 1.0 / (1.0 + std::exp(f));
  // Stay strictly inside (0, 1).
  constexpr double lo = 1e-300;
  const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(p, lo, hi);
}

void fit_sigmoid(std::span<const double> dec, std::span<const int> labels, double& a, double& b) {
  if (dec.size() != labels.size()) throw DimensionMismatchError("decision/label count mismatch");
  double prior1 = 0.0;
  double prior0 = 0.0;
  for (int l : labels) (l == 1 ? prior1 : prior0) += 1.0;
  if (prior1 == 0.0 || prior0 == 0.0) throw DegenerateDataError("calibration set needs both labels");

  constexpr int max_iter = 100;
  constexpr double min_step = 1e-10;
  constexpr double sigma = 1e-12;
  constexpr double eps = 1e-5;
  const double hi_target = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo_target = 1.0 / (prior0 + 2.0);
  const std::size_t n = dec.size();
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = labels[i] == 1 ? hi_target : lo_target;

  auto objective = [&](double aa, double bb) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double fapb = dec[i] * aa + bb;
      f += fapb >= 0.0 ? t[i] * fapb + std::log1p(std::exp(-fapb)) : (t[i] - 1.0) * fapb + std::log1p(std::exp(fapb));
    }
    return f;
  };

  a = 0.0;
  b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  double fval = objective(a, b);
  for (int it = 0; it < max_iter; ++it) {
    double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double fapb = dec[i] * a + b;
      double p, q;
      if (fapb >= 0.0) {
        p = std::exp(-fapb) / (1.0 + std::exp(-fapb));
        q = 1.0 / (1.0 + std::exp(-fapb));
      } else {
        p = 1.0 / (1.0 + std::exp(fapb));
        q = std::exp(fapb) / (1.0 + std::exp(fapb));
      }
      double d2 = p * q;
      h11 += dec[i] * dec[i] * d2;
      h22 += d2;
      h21 += dec[i] * d2;
      double d1 = t[i] - p;
      g1 += dec[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < eps && std::abs(g2) < eps) break;

    double det = h11 * h22 - h21 * h21;
    double da = -(h22 * g1 - h21 * g2) / det;
    double db = -(-h21 * g1 + h11 * g2) / det;
    double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= min_step) {
      double na = a + step * da;
      double nb = b + step * db;
      double nf = objective(na, nb);
      if (nf < fval + 0.0001 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < min_step) break;
  }
}

SvmModel fit_platt(const SvmModel& model, std::span<const TrainingExample> holdout) {
  std::vector<double> dec;
  std::vector<int> labels;
  dec.reserve(holdout.size());
  for (const auto& ex : holdout) {
    dec.push_back(decision_value(model, ex.features));
    labels.push_back(ex.label);
  }
  SvmModel out = model;
  fit_sigmoid(dec, labels, out.platt_a, out.platt_b);
  out.calibrated = true;
  return out;
}

double predict_proba(const SvmModel& model, std::span<const double> x) {
  if (!model.calibrated) throw UncalibratedModelError("model has no probability calibration");
  return platt_probability(decision_value(model, x), model.platt_a, model.platt_b);
}

KktReport kkt_audit(const SmoResult& result, std::span<const TrainingExample> data, double tol) {
  KktReport rep;
  const double c = result.model.params.c;
  double eq = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double a = result.alpha[i];
    const double y = data[i].label == 1 ? 1.0 : -1.0;
    if (a < 0.0 || a > c) rep.box_ok = false;
    rep.alpha_sum += a;
    eq += a * y;
    const double margin = y * decision_value(result.model, data[i].features);
    double v = 0.0;
    if (a <= 0.0) {
      v = std::max(0.0, 1.0 - margin);
    } else if (a >= c) {
      v = std::max(0.0, margin - 1.0);
    } else {
      v = std::abs(margin - 1.0);
    }
    rep.max_violation = std::max(rep.max_violation, v);
    if (v > tol) ++rep.violations;
  }
  rep.equality_residual = std::abs(eq);
  return rep;
}

std::vector<int> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("fold count must be at least 2");
  if (labels.size() < static_cast<std::size_t>(k)) throw DegenerateDataError("fewer examples than folds");
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
  std::mt19937_64 rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  std::vector<int> fold(labels.size());
  std::size_t cursor = 0;
  for (auto i : pos) fold[i] = static_cast<int>(cursor++ % static_cast<std::size_t>(k));
  for (auto i : neg) fold[i] = static_cast<int>(cursor++ % static_cast<std::size_t>(k));
  return fold;
}

namespace {

// Cross-validation on a precomputed Gram matrix of the full data set.
CvReport cross_validate_gram(std::span<const TrainingExample> data, std::span<const double> gram, int k,
                             const SvmParams& params, const Kernel& kernel, std::uint64_t seed) {
  const auto labels = plain_labels(data);
  const auto folds = stratified_folds(labels, k, seed);
  const std::size_t n = data.size();

  CvReport rep;
  rep.k = k;
  rep.per_fold_accuracy.assign(static_cast<std::size_t>(k), 0.0);
  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < n; ++i) (folds[i] == f ? test : train).push_back(i);

    // Inner stratified split: one fifth of the training folds calibrates the sigmoid.
    std::vector<int> train_labels(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) train_labels[i] = labels[train[i]];
    const auto inner = stratified_folds(train_labels, 5, seed + 1000003ULL * static_cast<std::uint64_t>(f + 1));
    std::vector<std::size_t> fit;
    std::vector<std::size_t> calib;
    for (std::size_t i = 0; i < train.size(); ++i) (inner[i] == 0 ? calib : fit).push_back(train[i]);

    std::vector<int> fit_labels(fit.size());
    for (std::size_t i = 0; i < fit.size(); ++i) fit_labels[i] = labels[fit[i]];
    if (std::count(fit_labels.begin(), fit_labels.end(), 1) == 0 ||
        std::count(fit_labels.begin(), fit_labels.end(), 0) == 0) {
      throw DegenerateDataError("a training fold lacks one of the labels");
    }

    auto r = solve_subset(data, gram, fit, params, kernel, seed + static_cast<std::uint64_t>(f));
    auto y = signed_labels(data, fit);

    std::vector<double> dec(calib.size());
    std::vector<int> calib_labels(calib.size());
    for (std::size_t i = 0; i < calib.size(); ++i) {
      dec[i] = gram_decision(gram, n, fit, r, y, calib[i]);
      calib_labels[i] = labels[calib[i]];
    }
    double a = 0.0;
    double b = 0.0;
    fit_sigmoid(dec, calib_labels, a, b);

    std::size_t correct = 0;
    for (auto q : test) {
      double p = platt_probability(gram_decision(gram, n, fit, r, y, q), a, b);
      if ((p >= 0.5 ? 1 : 0) == labels[q]) ++correct;
    }
    rep.per_fold_accuracy[static_cast<std::size_t>(f)] =
        test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size());
  }
  rep.mean_accuracy =
      std::accumulate(rep.per_fold_accuracy.begin(), rep.per_fold_accuracy.end(), 0.0) / static_cast<double>(k);
  return rep;
}

}  // namespace

CvReport cross_validate(std::span<const TrainingExample> data, int k, const SvmParams& params, std::uint64_t seed) {
  params.validate();
  check_dataset(data);
  const Kernel kernel = params.kernel_for_dim(data.front().features.size());
  const auto gram = kernel_matrix(to_matrix(data), kernel);
  return cross_validate_gram(data, gram, k, params, kernel, seed);
}

GridSearchResult grid_search(std::span<const TrainingExample> data, int k, const SvmParams& base,
                             std::uint64_t seed) {
  base.validate();
  check_dataset(data);
  const double dim = static_cast<double>(data.front().features.size());
  const auto pairwise = pairwise_matrix(to_matrix(data), base.kernel);

  GridSearchResult res;
  res.best_accuracy = -1.0;
  const std::vector<double> gammas = base.kernel == KernelType::Rbf ? std::vector<double>{0.1 / dim, 1.0 / dim, 10.0 / dim}
                                                                      : std::vector<double>{1.0 / dim};
  for (double gamma : gammas) {
    const Kernel kernel{base.kernel, gamma};
    const auto gram = gram_from_pairwise(pairwise, kernel);
    for (double c : {0.1, 1.0, 10.0}) {
      SvmParams p = base;
      p.gamma = gamma;
      p.c = c;
      auto rep = cross_validate_gram(data, gram, k, p, kernel, seed);
      res.entries.push_back({gamma, c, rep.mean_accuracy});
      if (rep.mean_accuracy > res.best_accuracy) {
        res.best_accuracy = rep.mean_accuracy;
        res.best = p;
      }
    }
  }
  return res;
}

SvmModel train_calibrated(std::span<const TrainingExample> data, const SvmParams& params, std::uint64_t seed) {
  check_dataset(data);
  const auto labels = plain_labels(data);
  const auto split = stratified_folds(labels, 5, seed);
  std::vector<TrainingExample> fit;
  std::vector<TrainingExample> calib;
  for (std::size_t i = 0; i < data.size(); ++i) (split[i] == 0 ? calib : fit).push_back(data[i]);
  return fit_platt(train_smo(fit, params, seed), calib);
}

nlohmann::json model_to_json(const SvmModel& model) {
  nlohmann::json svs = nlohmann::json::array();
  for (std::size_t i = 0; i < model.support_vectors.rows(); ++i) {
    auto r = model.support_vectors.row(i);
    svs.push_back(std::vector<double>(r.begin(), r.end()));
  }
  nlohmann::json platt = nullptr;
  if (model.calibrated) platt = {model.platt_a, model.platt_b};
  return {{"version", kModelFormatVersion},
          {"kernel", to_string(model.params.kernel)},
          {"gamma", model.params.gamma},
          {"c", model.params.c},
          {"tol", model.params.tol},
          {"dim", model.dim()},
          {"platt", platt},
          {"bias", model.bias},
          {"svs", svs},
          {"alphas_signed", model.alphas_signed}};
}

SvmModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != kModelFormatVersion) throw VersionError("unsupported model version");
    SvmModel m;
    m.params.kernel = kernel_type_from_string(j.at("kernel").get<std::string>());
    m.params.gamma = j.at("gamma").get<double>();
    m.params.c = j.at("c").get<double>();
    m.params.tol = j.value("tol", 1e-3);
    m.bias = j.at("bias").get<double>();
    const auto dim = j.at("dim").get<std::size_t>();
    m.support_vectors = FeatureMatrix(dim);
    for (const auto& row : j.at("svs")) m.support_vectors.push_back(row.get<std::vector<double>>());
    m.alphas_signed = j.at("alphas_signed").get<std::vector<double>>();
    if (m.alphas_signed.size() != m.support_vectors.rows()) throw DataError("model coefficient count mismatch");
    const auto& platt = j.at("platt");
    if (!platt.is_null()) {
      m.calibrated = true;
      m.platt_a = platt.at(0).get<double>();
      m.platt_b = platt.at(1).get<double>();
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model json: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("malformed model json: ") + e.what());
  }
}

void save_model(const SvmModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file " + path);
  out << model_to_json(model).dump() << '\n';
}

SvmModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelLoadError("cannot open model file " + path);
  try {
    return model_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ModelLoadError("cannot parse model file " + path + ": " + e.what());
  } catch (const DataError& e) {
    throw ModelLoadError("invalid model file " + path + ": " + e.what());
  }
}

std::string model_hash(const SvmModel& model) { return fnv1a_hex(model_to_json(model).dump()); }

nlohmann::json svm_params_to_json(const SvmParams& p) {
  return {{"kernel", to_string(p.kernel)}, {"gamma", p.gamma}, {"c", p.c}, {"tol", p.tol},
          {"max_iterations", p.max_iterations}};
}

SvmParams svm_params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("svm settings must be an object");
  SvmParams p;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "kernel") {
        try {
          p.kernel = kernel_type_from_string(v.get<std::string>());
        } catch (const Error& e) {
          throw ConfigError(e.what());
        }
      } else if (key == "gamma") p.gamma = v.get<double>();
      else if (key == "c") p.c = v.get<double>();
      else if (key == "tol") p.tol = v.get<double>();
      else if (key == "max_iterations") p.max_iterations = v.get<long>();
      else throw ConfigError("unknown svm setting '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed svm settings: ") + e.what());
  }
  p.validate();
  return p;
}

}  // namespace gazeintent
