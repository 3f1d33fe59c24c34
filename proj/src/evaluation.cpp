#include "gazeintent/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "gazeintent/errors.hpp"

namespace gazeintent {

namespace {

constexpr double kVarianceFloor = 1e-12;

GroupStats group(std::span<const double> v) {
  GroupStats g;
  g.n = v.size();
  g.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - g.mean) * (x - g.mean);
  g.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return g;
}

AccuracyCurve tally(ActionKind kind, std::span<const std::int64_t> grid, const std::vector<std::vector<int>>& outcomes,
                    const AttentionConfig& cfg) {
  AccuracyCurve curve;
  curve.kind = kind;
  curve.n_samples = outcomes.size();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::size_t correct = 0;
    std::size_t scored = 0;
    for (const auto& o : outcomes) {
      if (o[g] < 0) {
        ++curve.skipped;
        continue;
      }
      ++scored;
      correct += static_cast<std::size_t>(o[g]);
    }
    curve.t_prior.push_back(static_cast<double>(grid[g]) * cfg.frame);
    curve.accuracy.push_back(scored ? static_cast<double>(correct) / static_cast<double>(scored) : 0.0);
    curve.n.push_back(scored);
  }
  return curve;
}

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

}  // namespace

std::vector<Episode> low_chance_subset(std::span<const Episode> episodes, ActionKind kind) {
  std::vector<Episode> out;
  for (const auto& e : episodes) {
    if (e.kind != kind) continue;
    auto n = e.candidates.size();
    bool keep = kind == ActionKind::Pick ? n == 4 : (n >= 4 && n <= 6);
    if (keep) out.push_back(e);
  }
  return out;
}

std::vector<std::int64_t> sweep_grid(double t_min, double t_max, const AttentionConfig& cfg) {
  if (!(t_min >= 0.0) || !(t_max >= t_min)) throw ConfigError("sweep range must satisfy 0 <= t_min <= t_max");
  auto lo = static_cast<std::int64_t>(std::ceil(t_min / cfg.frame - 1e-9));
  auto hi = static_cast<std::int64_t>(std::floor(t_max / cfg.frame + 1e-9));
  std::vector<std::int64_t> grid;
  for (auto k = lo; k <= hi; ++k) grid.push_back(k);
  return grid;
}

std::vector<int> sweep_episode(const PredictorModels& models, const Episode& episode, std::span<const std::int64_t> grid,
                               const PredictorConfig& cfg, const BoardLayout& layout) {
  std::vector<int> out(grid.size(), -1);
  if (grid.empty() || episode.trace.empty()) return out;
  const auto& acfg = cfg.attention;
  const auto w = static_cast<std::int64_t>(acfg.samples_per_window);
  const std::int64_t action_slot = frame_index(episode.action_time, acfg);
  const auto [kmin, kmax] = std::minmax_element(grid.begin(), grid.end());
  const std::int64_t first = action_slot - *kmax - (w - 1);
  const auto count = static_cast<std::size_t>(*kmax - *kmin + w);

  auto ids = required_objects(episode.board, episode.kind);
  std::map<ObjectId, std::vector<double>> series;
  for (ObjectId id : ids) series[id] = attention_series(episode.trace, object_position(layout, id), first, count, acfg);

  const double covered_from = episode.trace.front().t - 0.5 * acfg.frame;
  const double covered_to = episode.trace.back().t + acfg.frame;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const std::int64_t end = action_slot - grid[g];
    const std::int64_t start = end - (w - 1);
    if (static_cast<double>(start) * acfg.frame < covered_from || static_cast<double>(end) * acfg.frame > covered_to) {
      continue;
    }
    const auto offset = static_cast<std::size_t>(start - first);
    ProfileSource src = [&](ObjectId id) -> std::span<const double> {
      return std::span<const double>(series.at(id)).subspan(offset, static_cast<std::size_t>(w));
    };
    auto p = predict(models, src, episode.board, episode.kind, static_cast<double>(end) * acfg.frame, cfg.threshold);
    out[g] = p.chosen == episode.true_target ? 1 : 0;
  }
  return out;
}

AccuracyCurve sweep_accuracy(const PredictorModels& models, std::span<const Episode> episodes, ActionKind kind,
                             double t_max, const PredictorConfig& cfg, double t_min, const BoardLayout& layout) {
  auto grid = sweep_grid(t_min, t_max, cfg.attention);
  std::vector<const Episode*> chosen;
  for (const auto& e : episodes)
    if (e.kind == kind) chosen.push_back(&e);
  std::vector<std::vector<int>> outcomes(chosen.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(chosen.size()); ++i) {
    outcomes[static_cast<std::size_t>(i)] = sweep_episode(models, *chosen[static_cast<std::size_t>(i)], grid, cfg, layout);
  }
  return tally(kind, grid, outcomes, cfg.attention);
}

AccuracyCurve cross_validated_sweep(std::span<const Episode> episodes, ActionKind kind, double t_min, double t_max,
                                    const SvmParams& params, std::uint64_t seed, const PredictorConfig& cfg, int k,
                                    bool f1_only, bool low_chance_only, const BoardLayout& layout) {
  if (k < 2) throw ConfigError("cross-validation needs k >= 2");
  auto grid = sweep_grid(t_min, t_max, cfg.attention);
  std::vector<Episode> pool;
  for (const auto& e : episodes)
    if (e.kind == kind) pool.push_back(e);
  if (pool.size() < static_cast<std::size_t>(k)) throw DegenerateDataError("fewer episodes than folds");

  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) fold[order[i]] = static_cast<int>(i % static_cast<std::size_t>(k));

  // Training examples per episode, at t_prior = 0.
  std::vector<std::vector<TrainingExample>> examples(pool.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(pool.size()); ++i) {
    examples[static_cast<std::size_t>(i)] =
        build_dataset(std::span<const Episode>(&pool[static_cast<std::size_t>(i)], 1), kind, 0.0, cfg.attention, f1_only, layout);
  }

  std::vector<std::vector<int>> outcomes;
  for (int f = 0; f < k; ++f) {
    std::vector<TrainingExample> train;
    std::vector<const Episode*> held;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (fold[i] == f) {
        auto n = pool[i].candidates.size();
        bool low = kind == ActionKind::Pick ? n == 4 : (n >= 4 && n <= 6);
        if (!low_chance_only || low) held.push_back(&pool[i]);
      } else {
        train.insert(train.end(), examples[i].begin(), examples[i].end());
      }
    }
    PredictorModels models;
    SvmModel m = train_calibrated(train, params, seed + static_cast<std::uint64_t>(f));
    (kind == ActionKind::Pick ? models.pick : models.place) = std::move(m);
    std::vector<std::vector<int>> part(held.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(held.size()); ++i) {
      part[static_cast<std::size_t>(i)] = sweep_episode(models, *held[static_cast<std::size_t>(i)], grid, cfg, layout);
    }
    std::move(part.begin(), part.end(), std::back_inserter(outcomes));
  }
  return tally(kind, grid, outcomes, cfg.attention);
}

SvmModel train_f1_baseline(std::span<const Episode> episodes, const SvmParams& params, std::uint64_t seed,
                           const AttentionConfig& cfg, const BoardLayout& layout) {
  auto data = build_dataset(episodes, ActionKind::Pick, 0.0, cfg, true, layout);
  if (data.empty()) throw DegenerateDataError("corpus has no pick episodes");
  return train_calibrated(data, params, seed);
}

double sign_test(std::size_t positive, std::size_t negative) {
  const std::size_t n = positive + negative;
  if (n == 0) return 1.0;
  boost::math::binomial_distribution<double> b(static_cast<double>(n), 0.5);
  const double tail = boost::math::cdf(b, static_cast<double>(std::min(positive, negative)));
  return std::min(1.0, 2.0 * tail);
}

ComparisonReport compare_curves(const AccuracyCurve& a, const AccuracyCurve& b) {
  if (a.t_prior.size() != b.t_prior.size()) throw GridMismatchError("curves have different grid lengths");
  for (std::size_t i = 0; i < a.t_prior.size(); ++i) {
    if (std::abs(a.t_prior[i] - b.t_prior[i]) > 1e-9) throw GridMismatchError("curves have different grids");
  }
  ComparisonReport r;
  r.t_prior = a.t_prior;
  for (std::size_t i = 0; i < a.accuracy.size(); ++i) {
    double d = a.accuracy[i] - b.accuracy[i];
    r.difference.push_back(d);
    if (d > 0.0) ++r.positive;
    else if (d < 0.0) ++r.negative;
    else ++r.ties;
  }
  if (!r.difference.empty()) {
    r.mean_difference = std::accumulate(r.difference.begin(), r.difference.end(), 0.0) /
                        static_cast<double>(r.difference.size());
  }
  r.sign_test_p = sign_test(r.positive, r.negative);
  return r;
}

DurationStats welch_test(std::span<const double> pick, std::span<const double> place) {
  if (pick.size() < 2 || place.size() < 2) throw DegenerateDataError("each group needs at least two durations");
  DurationStats s;
  s.pick = group(pick);
  s.place = group(place);
  const double v1 = std::max(s.pick.sd * s.pick.sd, kVarianceFloor) / static_cast<double>(s.pick.n);
  const double v2 = std::max(s.place.sd * s.place.sd, kVarianceFloor) / static_cast<double>(s.place.n);
  s.t_statistic = (s.pick.mean - s.place.mean) / std::sqrt(v1 + v2);
  s.df = (v1 + v2) * (v1 + v2) /
         (v1 * v1 / static_cast<double>(s.pick.n - 1) + v2 * v2 / static_cast<double>(s.place.n - 1));
  boost::math::students_t_distribution<double> dist(s.df);
  s.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(s.t_statistic))));
  return s;
}

DurationStats duration_stats(std::span<const Episode> episodes) {
  std::vector<double> pick;
  std::vector<double> place;
  for (const auto& e : episodes) (e.kind == ActionKind::Pick ? pick : place).push_back(e.duration());
  return welch_test(pick, place);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("spearman inputs differ in length");
  if (x.size() < 2) throw DataError("spearman needs at least two points");
  auto rx = ranks(x);
  auto ry = ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(rx.size());
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(ry.size());
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::string curve_to_csv(const AccuracyCurve& curve) {
  std::ostringstream os;
  os << "t_prior_s,accuracy,n\n";
  for (std::size_t i = 0; i < curve.t_prior.size(); ++i) {
    os << fmt(curve.t_prior[i], 10) << ',' << fmt(curve.accuracy[i], 10) << ',' << curve.n[i] << '\n';
  }
  return os.str();
}

nlohmann::json comparison_to_json(const ComparisonReport& r) {
  return {{"t_prior", r.t_prior},           {"difference", r.difference}, {"mean_difference", r.mean_difference},
          {"positive", r.positive},         {"negative", r.negative},     {"ties", r.ties},
          {"sign_test_p", r.sign_test_p}};
}

nlohmann::json duration_stats_to_json(const DurationStats& s) {
  auto g = [](const GroupStats& x) { return nlohmann::json{{"mean", x.mean}, {"sd", x.sd}, {"n", x.n}}; };
  return {{"pick", g(s.pick)}, {"place", g(s.place)}, {"t", s.t_statistic}, {"df", s.df}, {"p", s.p_value}};
}

std::string render_svg(std::span<const PlotSeries> series, double chance, const std::string& title) {
  constexpr double W = 640, H = 400, L = 60, R = 20, T = 40, B = 50;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  double tmax = 0.0;
  for (const auto& s : series)
    if (s.curve && !s.curve->t_prior.empty()) tmax = std::max(tmax, s.curve->t_prior.back());
  if (tmax <= 0.0) tmax = 1.0;
  auto x = [&](double t) { return L + (W - L - R) * t / tmax; };
  auto y = [&](double a) { return T + (H - T - B) * (1.0 - a); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << y(0) << "\" x2=\"" << W - R << "\" y2=\"" << y(0) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << y(0) << "\" x2=\"" << L << "\" y2=\"" << y(1) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    double a = i / 4.0;
    os << "<text x=\"" << L - 8 << "\" y=\"" << y(a) + 4 << "\" text-anchor=\"end\">" << fmt(a, 2) << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    double t = tmax * i / 4.0;
    os << "<text x=\"" << x(t) << "\" y=\"" << y(0) + 18 << "\" text-anchor=\"middle\">" << fmt(t, 3) << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">t_prior (s)</text>\n";
  os << "<text x=\"15\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 15 " << (T + H - B) / 2
     << ")\" text-anchor=\"middle\">accuracy</text>\n";
  os << "<line x1=\"" << x(0) << "\" y1=\"" << y(chance) << "\" x2=\"" << x(tmax) << "\" y2=\"" << y(chance)
     << "\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n";
  std::size_t idx = 0;
  for (const auto& s : series) {
    if (!s.curve) continue;
    const char* color = colors[idx % 4];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.curve->t_prior.size(); ++i) {
      os << fmt(x(s.curve->t_prior[i]), 7) << ',' << fmt(y(s.curve->accuracy[i]), 7) << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << W - R - 150 << "\" y=\"" << T + 16 * static_cast<double>(idx) << "\" fill=\"" << color << "\">"
       << s.label << "</text>\n";
    ++idx;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace gazeintent
