#pragma once

#include "gazeintent/predictor.hpp"
#include "gazeintent/synthetic_user.hpp"

namespace fixtures {

inline constexpr std::uint64_t kCorpusSeed = 7;

/// Default-parameter 912-episode corpus at kCorpusSeed, built once.
const gazeintent::Corpus& corpus();
/// Predictors trained on corpus(), built once.
const std::shared_ptr<const gazeintent::PredictorModels>& models();

/// A scratch path under the system temp directory, removed on destruction.
class TempPath {
 public:
  explicit TempPath(const std::string& name);
  ~TempPath();
  [[nodiscard]] const std::string& str() const { return path_; }

 private:
  std::string path_;
};

}  // namespace fixtures
