#pragma once

// Kernel evaluation kernels. Every routine has an OpenMP-parallel form and a
// serial reference; both evaluate each entry through the same scalar
// function, so their outputs are bitwise identical.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gazeintent {

enum class KernelType { Linear, Rbf };

[[nodiscard]] const char* to_string(KernelType type);
[[nodiscard]] KernelType kernel_type_from_string(const std::string& text);

struct Kernel {
  KernelType type = KernelType::Rbf;
  double gamma = 1.0;

  [[nodiscard]] double operator()(std::span<const double> a, std::span<const double> b) const;
};

/// Dense row-major matrix of feature vectors.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(std::size_t cols) : cols_(cols) {}
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  void push_back(std::span<const double> row);
  void reserve(std::size_t rows) { data_.reserve(rows * cols_); }

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  [[nodiscard]] std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  [[nodiscard]] std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  [[nodiscard]] const std::vector<double>& data() const { return data_; }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

[[nodiscard]] double dot(std::span<const double> a, std::span<const double> b);
[[nodiscard]] double squared_distance(std::span<const double> a, std::span<const double> b);

/// Full n x n Gram matrix, row-major.
[[nodiscard]] std::vector<double> kernel_matrix(const FeatureMatrix& x, const Kernel& k);
[[nodiscard]] std::vector<double> kernel_matrix_serial(const FeatureMatrix& x, const Kernel& k);

/// Kernel-independent pairwise statistic: squared distances for RBF, dot products for linear.
/// Converting it with `gram_from_pairwise` yields kernel_matrix for any gamma.
[[nodiscard]] std::vector<double> pairwise_matrix(const FeatureMatrix& x, KernelType type);
[[nodiscard]] std::vector<double> gram_from_pairwise(std::span<const double> pairwise, const Kernel& k);

/// out[i] = sum_j coef[j] * K(sv_j, q_i) + bias.
void decision_batch(const FeatureMatrix& svs, std::span<const double> coef, double bias, const Kernel& k,
                    const FeatureMatrix& queries, std::span<double> out);
void decision_batch_serial(const FeatureMatrix& svs, std::span<const double> coef, double bias, const Kernel& k,
                           const FeatureMatrix& queries, std::span<double> out);

}  // namespace gazeintent
