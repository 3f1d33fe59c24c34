#include "gazeintent/kernels.hpp"

#include <cmath>
#include <string>

#include "gazeintent/errors.hpp"

namespace gazeintent {

const char* to_string(KernelType type) { return type == KernelType::Linear ? "linear" : "rbf"; }

KernelType kernel_type_from_string(const std::string& text) {
  if (text == "linear") return KernelType::Linear;
  if (text == "rbf") return KernelType::Rbf;
  throw ConfigError("unknown kernel '" + text + "' (expected linear|rbf)");
}

void FeatureMatrix::push_back(std::span<const double> row) {
  if (rows_ == 0 && cols_ == 0) cols_ = row.size();
  if (row.size() != cols_) throw DimensionMismatchError("feature row has wrong dimension");
  data_.insert(data_.end(), row.begin(), row.end());
  ++rows_;
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const double* pa = a.data();
  const double* pb = b.data();
  double s = 0.0;
#pragma omp simd reduction(+ : s)
  for (std::size_t i = 0; i < n; ++i) s += pa[i] * pb[i];
  return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const double* pa = a.data();
  const double* pb = b.data();
  double s = 0.0;
#pragma omp simd reduction(+ : s)
  for (std::size_t i = 0; i < n; ++i) {
    double d = pa[i] - pb[i];
    s += d * d;
  }
  return s;
}

double Kernel::operator()(std::span<const double> a, std::span<const double> b) const {
  if (type == KernelType::Linear) return dot(a, b);
  return std::exp(-gamma * squared_distance(a, b));
}

namespace {

inline double pairwise_entry(std::span<const double> a, std::span<const double> b, KernelType type) {
  return type == KernelType::Linear ? dot(a, b) : squared_distance(a, b);
}

inline double gram_entry(double pairwise, const Kernel& k) {
  return k.type == KernelType::Linear ? pairwise : std::exp(-k.gamma * pairwise);
}

}  // namespace

std::vector<double> kernel_matrix(const FeatureMatrix& x, const Kernel& k) {
  return gram_from_pairwise(pairwise_matrix(x, k.type), k);
}

std::vector<double> kernel_matrix_serial(const FeatureMatrix& x, const Kernel& k) {
  const std::size_t n = x.rows();
  std::vector<double> g(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double v = gram_entry(pairwise_entry(x.row(i), x.row(j), k.type), k);
      g[i * n + j] = v;
      g[j * n + i] = v;
    }
  }
  return g;
}

std::vector<double> pairwise_matrix(const FeatureMatrix& x, KernelType type) {
  const auto n = static_cast<std::ptrdiff_t>(x.rows());
  std::vector<double> p(static_cast<std::size_t>(n * n));
  // Upper triangle rows have decreasing work; dynamic scheduling balances it.
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::ptrdiff_t j = i; j < n; ++j) {
      double v = pairwise_entry(x.row(i), x.row(j), type);
      p[i * n + j] = v;
      p[j * n + i] = v;
    }
  }
  return p;
}

std::vector<double> gram_from_pairwise(std::span<const double> pairwise, const Kernel& k) {
  std::vector<double> g(pairwise.size());
  const auto n = static_cast<std::ptrdiff_t>(pairwise.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) g[i] = gram_entry(pairwise[i], k);
  return g;
}

namespace {

void check_batch(const FeatureMatrix& svs, std::span<const double> coef, const FeatureMatrix& queries,
                 std::span<double> out) {
  if (coef.size() != svs.rows()) throw DimensionMismatchError("coefficient count differs from support vectors");
  if (out.size() != queries.rows()) throw DimensionMismatchError("output size differs from query count");
  if (queries.rows() > 0 && svs.rows() > 0 && queries.cols() != svs.cols()) {
    throw DimensionMismatchError("query dimension differs from support vectors");
  }
}

inline double decision_one(const FeatureMatrix& svs, std::span<const double> coef, double bias, const Kernel& k,
                           std::span<const double> q) {
  double s = 0.0;
  for (std::size_t j = 0; j < svs.rows(); ++j) s += coef[j] * k(svs.row(j), q);
  return s + bias;
}

}  // namespace

void decision_batch(const FeatureMatrix& svs, std::span<const double> coef, double bias, const Kernel& k,
                    const FeatureMatrix& queries, std::span<double> out) {
  check_batch(svs, coef, queries, out);
  const auto m = static_cast<std::ptrdiff_t>(queries.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < m; ++i) out[i] = decision_one(svs, coef, bias, k, queries.row(i));
}

void decision_batch_serial(const FeatureMatrix& svs, std::span<const double> coef, double bias, const Kernel& k,
                           const FeatureMatrix& queries, std::span<double> out) {
  check_batch(svs, coef, queries, out);
  for (std::size_t i = 0; i < queries.rows(); ++i) out[i] = decision_one(svs, coef, bias, k, queries.row(i));
}

}  // namespace gazeintent
