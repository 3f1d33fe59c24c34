#pragma once

// Binary kernel SVM trained with sequential minimal optimization, Platt
// probability calibration and stratified k-fold cross-validation.

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "gazeintent/kernels.hpp"

namespace gazeintent {

inline constexpr int kModelFormatVersion = 1;

struct TrainingExample {
  std::vector<double> features;
  int label = 0;  ///< 1 = chosen, 0 = not chosen
};

struct SvmParams {
  KernelType kernel = KernelType::Rbf;
  double gamma = 0.0;  ///< RBF width; <= 0 resolves to 1/dim at training time
  double c = 1.0;      ///< box constraint
  double tol = 1e-3;   ///< KKT tolerance (maximal-violating-pair gap)
  long max_iterations = 10'000'000;

  /// Throws ConfigError on c <= 0, negative gamma or tol <= 0.
  void validate() const;
  [[nodiscard]] Kernel kernel_for_dim(std::size_t dim) const;
  friend bool operator==(const SvmParams&, const SvmParams&) = default;
};

[[nodiscard]] nlohmann::json svm_params_to_json(const SvmParams& p);
/// Missing keys keep their defaults; unknown keys throw ConfigError.
[[nodiscard]] SvmParams svm_params_from_json(const nlohmann::json& j);

struct SvmModel {
  FeatureMatrix support_vectors;
  std::vector<double> alphas_signed;  ///< alpha_i * y_i, y in {-1, +1}
  double bias = 0.0;
  SvmParams params;  ///< gamma resolved
  bool calibrated = false;
  double platt_a = 0.0;
  double platt_b = 0.0;

  [[nodiscard]] std::size_t dim() const { return support_vectors.cols(); }
  [[nodiscard]] Kernel kernel() const { return {params.kernel, params.gamma}; }
  friend bool operator==(const SvmModel&, const SvmModel&) = default;
};

/// Training result with the full dual solution, in input order.
struct SmoResult {
  SvmModel model;
  std::vector<double> alpha;
  double dual_objective = 0.0;  ///< sum(alpha) - 1/2 alpha' Q alpha
  long iterations = 0;
};

/// Throws DegenerateDataError (single class / empty) or DimensionMismatchError.
[[nodiscard]] SvmModel train_smo(std::span<const TrainingExample> data, const SvmParams& params, std::uint64_t seed);
[[nodiscard]] SmoResult train_smo_detailed(std::span<const TrainingExample> data, const SvmParams& params,
                                           std::uint64_t seed);

[[nodiscard]] double decision_value(const SvmModel& model, std::span<const double> x);

/// Regularized maximum-likelihood sigmoid fit P = 1 / (1 + exp(A f + B)) on holdout decision values.
[[nodiscard]] SvmModel fit_platt(const SvmModel& model, std::span<const TrainingExample> holdout);
/// Sigmoid fit on raw decision values and labels (Newton method with backtracking).
void fit_sigmoid(std::span<const double> decision_values, std::span<const int> labels, double& a, double& b);
[[nodiscard]] double platt_probability(double decision, double a, double b);

/// Throws UncalibratedModelError before fit_platt.
[[nodiscard]] double predict_proba(const SvmModel& model, std::span<const double> x);

struct KktReport {
  std::size_t violations = 0;
  double max_violation = 0.0;
  double equality_residual = 0.0;  ///< |sum alpha_i y_i|
  double alpha_sum = 0.0;
  bool box_ok = true;

  [[nodiscard]] bool ok(double tol) const {
    return violations == 0 && box_ok && equality_residual <= 1e-8 * std::max(1.0, alpha_sum) && max_violation <= tol;
  }
};

/// Complementarity audit of a training solution against its model's decision function.
[[nodiscard]] KktReport kkt_audit(const SmoResult& result, std::span<const TrainingExample> data, double tol);

struct CvReport {
  int k = 0;
  std::vector<double> per_fold_accuracy;
  double mean_accuracy = 0.0;
};

/// Stratified fold assignment: labels spread evenly, fold sizes differ by at most one.
[[nodiscard]] std::vector<int> stratified_folds(std::span<const int> labels, int k, std::uint64_t seed);

/// Train on k-1 folds (Platt fitted on an inner stratified 20% of them), score the held-out fold.
[[nodiscard]] CvReport cross_validate(std::span<const TrainingExample> data, int k, const SvmParams& params,
                                      std::uint64_t seed);

struct GridSearchResult {
  SvmParams best;
  double best_accuracy = 0.0;
  struct Entry {
    double gamma;
    double c;
    double accuracy;
  };
  std::vector<Entry> entries;
};

/// gamma in {0.1, 1, 10} / dim, C in {0.1, 1, 10}, scored by k-fold CV accuracy.
[[nodiscard]] GridSearchResult grid_search(std::span<const TrainingExample> data, int k, const SvmParams& base,
                                           std::uint64_t seed);

/// SVM fitted on a stratified 80% split and Platt-calibrated on the remaining 20%.
[[nodiscard]] SvmModel train_calibrated(std::span<const TrainingExample> data, const SvmParams& params,
                                        std::uint64_t seed);

[[nodiscard]] nlohmann::json model_to_json(const SvmModel& model);
/// Throws VersionError or DataError.
[[nodiscard]] SvmModel model_from_json(const nlohmann::json& j);
void save_model(const SvmModel& model, const std::string& path);
[[nodiscard]] SvmModel load_model(const std::string& path);
/// Stable 64-bit content hash (hex) of the serialized model.
[[nodiscard]] std::string model_hash(const SvmModel& model);

}  // namespace gazeintent
