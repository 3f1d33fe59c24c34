#pragma once

// Anticipation-time analysis: accuracy sweeps over the prediction offset,
// low-chance subsets, the F1-only baseline, curve comparison and episode
// duration statistics.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "gazeintent/predictor.hpp"

namespace gazeintent {

/// Pick episodes with exactly 4 candidates; place episodes with 4 to 6.
[[nodiscard]] std::vector<Episode> low_chance_subset(std::span<const Episode> episodes, ActionKind kind);

struct AccuracyCurve {
  ActionKind kind = ActionKind::Pick;
  std::vector<double> t_prior;        ///< s, one frame apart
  std::vector<double> accuracy;
  std::vector<std::size_t> n;         ///< episodes scored at each point
  std::size_t n_samples = 0;          ///< episodes of `kind` offered to the sweep
  std::size_t skipped = 0;            ///< (episode, point) pairs lacking trace coverage
};

/// Frame offsets k with t_min <= k * frame <= t_max.
[[nodiscard]] std::vector<std::int64_t> sweep_grid(double t_min, double t_max, const AttentionConfig& cfg);

/// Per-point outcome of one episode: 1 correct, 0 wrong, -1 window not covered by the trace.
[[nodiscard]] std::vector<int> sweep_episode(const PredictorModels& models, const Episode& episode,
                                             std::span<const std::int64_t> grid, const PredictorConfig& cfg,
                                             const BoardLayout& layout = standard_layout());

/// Windows ending at action_time - t_prior for every grid point; fraction where
/// the resolved target equals the true target. OpenMP-parallel over episodes.
[[nodiscard]] AccuracyCurve sweep_accuracy(const PredictorModels& models, std::span<const Episode> episodes,
                                           ActionKind kind, double t_max, const PredictorConfig& cfg,
                                           double t_min = 0.0, const BoardLayout& layout = standard_layout());

/// Episode-level k-fold over the episodes of `kind`: each fold's model is
/// trained on the other folds and scores its held-out episodes (restricted to
/// the low-chance subset when `low_chance_only`). `f1_only` trains the pick
/// model on F1 alone.
[[nodiscard]] AccuracyCurve cross_validated_sweep(std::span<const Episode> episodes, ActionKind kind, double t_min,
                                                  double t_max, const SvmParams& params, std::uint64_t seed,
                                                  const PredictorConfig& cfg, int k = 5, bool f1_only = false,
                                                  bool low_chance_only = true,
                                                  const BoardLayout& layout = standard_layout());

/// Pick model on 300-wide F1-only vectors. Throws DegenerateDataError without pick episodes.
[[nodiscard]] SvmModel train_f1_baseline(std::span<const Episode> episodes, const SvmParams& params,
                                         std::uint64_t seed, const AttentionConfig& cfg = AttentionConfig{},
                                         const BoardLayout& layout = standard_layout());

struct ComparisonReport {
  std::vector<double> t_prior;
  std::vector<double> difference;  ///< a - b per point
  double mean_difference = 0.0;
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t ties = 0;
  double sign_test_p = 1.0;  ///< two-sided, ties dropped
};

/// Throws GridMismatchError unless both curves share the grid.
[[nodiscard]] ComparisonReport compare_curves(const AccuracyCurve& a, const AccuracyCurve& b);
/// Two-sided exact sign test p-value.
[[nodiscard]] double sign_test(std::size_t positive, std::size_t negative);

struct GroupStats {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

struct DurationStats {
  GroupStats pick;
  GroupStats place;
  double t_statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

/// Welch two-sample t-test of pick against place durations (variances floored at a small epsilon).
/// Throws DegenerateDataError with fewer than two durations in a group.
[[nodiscard]] DurationStats welch_test(std::span<const double> pick, std::span<const double> place);
[[nodiscard]] DurationStats duration_stats(std::span<const Episode> episodes);

/// Rank correlation with average ranks for ties. Throws DataError on length mismatch or n < 2.
[[nodiscard]] double spearman(std::span<const double> x, std::span<const double> y);

[[nodiscard]] std::string curve_to_csv(const AccuracyCurve& curve);
[[nodiscard]] nlohmann::json comparison_to_json(const ComparisonReport& r);
[[nodiscard]] nlohmann::json duration_stats_to_json(const DurationStats& s);

struct PlotSeries {
  std::string label;
  const AccuracyCurve* curve = nullptr;
};

/// Static SVG line chart of accuracy against t_prior with a dashed chance line.
[[nodiscard]] std::string render_svg(std::span<const PlotSeries> series, double chance, const std::string& title);

}  // namespace gazeintent
