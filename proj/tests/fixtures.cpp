#include "fixtures.hpp"

#include <filesystem>
#include <random>

namespace fixtures {

const gazeintent::Corpus& corpus() {
  static const gazeintent::Corpus c = gazeintent::generate_corpus(gazeintent::GazeProfileParams{}, 912, kCorpusSeed);
  return c;
}

const std::shared_ptr<const gazeintent::PredictorModels>& models() {
  static const auto m = std::make_shared<const gazeintent::PredictorModels>(
      gazeintent::train_predictors(corpus().episodes, gazeintent::SvmParams{}, kCorpusSeed));
  return m;
}

TempPath::TempPath(const std::string& name) {
  std::random_device rd;
  path_ = (std::filesystem::temp_directory_path() / ("gazeintent-" + std::to_string(rd()) + "-" + name)).string();
}

TempPath::~TempPath() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace fixtures
