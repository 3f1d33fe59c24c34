// Command-line entry point. Exit codes: 0 success, 2 configuration error, 3 data error.

#include <array>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"

#include "gazeintent/errors.hpp"
#include "gazeintent/evaluation.hpp"
#include "gazeintent/run_config.hpp"
#include "gazeintent/wire.hpp"

using namespace gazeintent;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

WireServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

void print_config(const RunConfig& cfg, const json& extra) {
  json j = run_config_to_json(cfg);
  j["command"] = extra;
  std::cout << "config " << j.dump() << '\n';
}

std::array<double, kScenarioCount> parse_mix(const std::string& text) {
  std::array<double, kScenarioCount> mix{};
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("mix entries look like Name=weight, got '" + item + "'");
    Scenario s;
    try {
      s = scenario_from_string(item.substr(0, eq));
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
    try {
      mix[static_cast<std::size_t>(s)] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad weight in mix entry '" + item + "'");
    }
  }
  return mix;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write '" + path + "'");
  f << text;
}

std::pair<std::string, unsigned short> parse_addr(const std::string& addr) {
  auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw ConfigError("address must be HOST:PORT");
  try {
    int port = std::stoi(addr.substr(colon + 1));
    if (port < 0 || port > 65535) throw ConfigError("port out of range");
    return {addr.substr(0, colon), static_cast<unsigned short>(port)};
  } catch (const std::logic_error&) {
    throw ConfigError("bad port in '" + addr + "'");
  }
}

std::vector<Mode> parse_modes(const std::string& text) {
  if (text == "all") return {Mode::FollowIntention, Mode::Random, Mode::Rebel};
  std::vector<Mode> modes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) modes.push_back(mode_from_string(item));
  if (modes.empty()) throw ConfigError("no behaviour mode given");
  return modes;
}

double mean_chance(std::span<const Episode> episodes) {
  if (episodes.empty()) return 0.0;
  double s = 0.0;
  for (const auto& e : episodes) s += 1.0 / static_cast<double>(e.candidates.size());
  return s / static_cast<double>(episodes.size());
}

PredictorModels train_models(std::span<const Episode> episodes, const RunConfig& cfg, std::uint64_t seed, bool grid,
                             json& report) {
  auto pick = build_dataset(episodes, ActionKind::Pick, 0.0, cfg.attention);
  auto place = build_dataset(episodes, ActionKind::Place, 0.0, cfg.attention);
  if (pick.empty() || place.empty()) throw DegenerateDataError("corpus needs both pick and place episodes");
  SvmParams pick_params = cfg.svm;
  SvmParams place_params = cfg.svm;
  if (grid) {
    auto gp = grid_search(pick, cfg.folds, cfg.svm, seed);
    auto gl = grid_search(place, cfg.folds, cfg.svm, seed + 1);
    pick_params = gp.best;
    place_params = gl.best;
    report["grid"] = {{"pick", {{"c", gp.best.c}, {"gamma", gp.best.gamma}, {"accuracy", gp.best_accuracy}}},
                      {"place", {{"c", gl.best.c}, {"gamma", gl.best.gamma}, {"accuracy", gl.best_accuracy}}}};
  }
  auto cv_pick = cross_validate(pick, cfg.folds, pick_params, seed);
  auto cv_place = cross_validate(place, cfg.folds, place_params, seed + 1);
  report["cv"] = {{"pick", {{"accuracy", cv_pick.mean_accuracy}, {"folds", cv_pick.per_fold_accuracy}, {"examples", pick.size()}}},
                  {"place", {{"accuracy", cv_place.mean_accuracy}, {"folds", cv_place.per_fold_accuracy}, {"examples", place.size()}}}};
  return {train_calibrated(pick, pick_params, seed), train_calibrated(place, place_params, seed + 1)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaze-based pick/place intention prediction and robot behaviour toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON configuration file (unknown keys are rejected)");

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "Generate a synthetic episode corpus (JSONL)");
  std::size_t gen_n = 912;
  std::uint64_t gen_seed = 7;
  std::string gen_out = "corpus.jsonl";
  std::string gen_mix;
  gen->add_option("--n", gen_n, "number of episodes")->capture_default_str();
  gen->add_option("--seed", gen_seed, "corpus seed")->capture_default_str();
  gen->add_option("--out", gen_out, "output file")->capture_default_str();
  gen->add_option("--mix", gen_mix, "scenario weights, e.g. OneDominant=0.5,Alternating=0.5 (unlisted scenarios get 0)");

  // train
  auto* train = app.add_subcommand("train", "Train pick and place classifiers and report per-object CV accuracy");
  std::string train_corpus;
  std::string train_out = "models";
  std::uint64_t train_seed = 7;
  bool train_grid = false;
  train->add_option("--corpus", train_corpus, "corpus file")->required();
  train->add_option("--out", train_out, "model directory")->capture_default_str();
  train->add_option("--seed", train_seed, "fold and calibration seed")->capture_default_str();
  train->add_flag("--grid", train_grid, "select (C, gamma) by grid search first");

  // eval-sweep
  auto* sweep = app.add_subcommand("eval-sweep", "Accuracy against prediction offset on the low-chance subset");
  std::string sw_corpus, sw_models, sw_kind = "pick", sw_out = "curve.csv", sw_svg;
  double sw_tmin = 0.0, sw_tmax = 4.0;
  bool sw_baseline = false, sw_cv = false;
  std::uint64_t sw_seed = 7;
  sweep->add_option("--corpus", sw_corpus, "corpus file")->required();
  sweep->add_option("--models", sw_models, "model directory (not needed with --cv)");
  sweep->add_option("--kind", sw_kind, "pick or place")->capture_default_str();
  sweep->add_option("--tmin", sw_tmin, "smallest offset, s")->capture_default_str();
  sweep->add_option("--tmax", sw_tmax, "largest offset, s")->capture_default_str();
  sweep->add_option("--out", sw_out, "curve CSV")->capture_default_str();
  sweep->add_option("--svg", sw_svg, "write an SVG plot");
  sweep->add_flag("--baseline", sw_baseline, "also evaluate an F1-only pick model and compare");
  sweep->add_flag("--cv", sw_cv, "episode-level k-fold: score held-out folds with models trained on the rest");
  sweep->add_option("--seed", sw_seed, "training seed for --baseline / --cv")->capture_default_str();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Closed-loop runs of the synthetic user against the robot behaviours");
  std::string sim_mode = "all", sim_models;
  std::size_t sim_boards = 30;
  std::uint64_t sim_seed = 1001, sim_train_seed = 7;
  sim->add_option("--mode", sim_mode, "follow, rebel, random, a comma list or all")->capture_default_str();
  sim->add_option("--boards", sim_boards, "boards to play")->capture_default_str();
  sim->add_option("--seed", sim_seed, "board seed")->capture_default_str();
  sim->add_option("--models", sim_models, "model directory; trains on a fresh 912-episode corpus when omitted");
  sim->add_option("--train-seed", sim_train_seed, "corpus seed used when training on the fly")->capture_default_str();

  // serve
  auto* serve = app.add_subcommand("serve", "Run the session service over WebSocket");
  std::string sv_models, sv_addr = "127.0.0.1:8765", sv_logs = "sessions";
  serve->add_option("--models", sv_models, "model directory")->required();
  serve->add_option("--addr", sv_addr, "listen address HOST:PORT")->capture_default_str();
  serve->add_option("--log-dir", sv_logs, "directory for session logs")->capture_default_str();

  // replay
  auto* rep = app.add_subcommand("replay", "Replay a session log and verify it reproduces exactly");
  std::string rp_log, rp_models;
  rep->add_option("--log", rp_log, "session log")->required();
  rep->add_option("--models", rp_models, "model directory")->required();

  // drive
  auto* drive = app.add_subcommand("drive", "Connect to a session service and play one board as the synthetic user");
  std::string dr_addr = "127.0.0.1:8765", dr_mode = "follow";
  std::uint64_t dr_seed = 42;
  drive->add_option("--addr", dr_addr, "server address HOST:PORT")->capture_default_str();
  drive->add_option("--seed", dr_seed, "board seed")->capture_default_str();
  drive->add_option("--mode", dr_mode, "behaviour mode")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    cfg.validate();

    if (*gen) {
      if (!gen_mix.empty()) {
        cfg.user.mix = parse_mix(gen_mix);
        cfg.user.validate();
      }
      print_config(cfg, {{"name", "gen-corpus"}, {"n", gen_n}, {"seed", gen_seed}, {"out", gen_out}});
      auto corpus = generate_corpus(cfg.user, gen_n, gen_seed, standard_layout(), cfg.attention);
      save_corpus(corpus, gen_out);
      std::map<std::string, std::size_t> hist;
      for (const auto& e : corpus.episodes) ++hist[to_string(e.scenario)];
      std::cout << "episodes " << corpus.episodes.size() << '\n';
      for (const auto& [name, n] : hist) std::cout << "  " << name << ' ' << n << '\n';
      return 0;
    }

    if (*train) {
      print_config(cfg, {{"name", "train"}, {"corpus", train_corpus}, {"seed", train_seed}, {"grid", train_grid}});
      auto corpus = load_corpus(train_corpus);
      json report;
      auto models = train_models(corpus.episodes, cfg, train_seed, train_grid, report);
      save_models(models, train_out);
      report["model_hash"] = models_hash(models);
      if (train_grid) {
        std::cout << "selected pick C=" << report["grid"]["pick"]["c"] << " gamma=" << report["grid"]["pick"]["gamma"]
                  << "; place C=" << report["grid"]["place"]["c"] << " gamma=" << report["grid"]["place"]["gamma"] << '\n';
      }
      std::cout << "per-object CV accuracy: pick " << report["cv"]["pick"]["accuracy"] << ", place "
                << report["cv"]["place"]["accuracy"] << '\n';
      std::cout << report.dump() << '\n';
      return 0;
    }

    if (*sweep) {
      ActionKind kind;
      try {
        kind = action_kind_from_string(sw_kind);
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
      if (sw_baseline && kind != ActionKind::Pick) throw ConfigError("--baseline applies to pick sweeps");
      if (!sw_cv && sw_models.empty()) throw ConfigError("--models is required unless --cv is given");
      print_config(cfg, {{"name", "eval-sweep"}, {"corpus", sw_corpus}, {"models", sw_models}, {"kind", sw_kind},
                         {"tmin", sw_tmin}, {"tmax", sw_tmax}, {"baseline", sw_baseline}, {"cv", sw_cv}, {"seed", sw_seed}});
      auto corpus = load_corpus(sw_corpus);
      auto subset = low_chance_subset(corpus.episodes, kind);
      auto pc = cfg.predictor();
      AccuracyCurve curve;
      std::optional<AccuracyCurve> base;
      if (sw_cv) {
        curve = cross_validated_sweep(corpus.episodes, kind, sw_tmin, sw_tmax, cfg.svm, sw_seed, pc, cfg.folds);
        if (sw_baseline)
          base = cross_validated_sweep(corpus.episodes, kind, sw_tmin, sw_tmax, cfg.svm, sw_seed, pc, cfg.folds, true);
      } else {
        auto models = load_models(sw_models);
        curve = sweep_accuracy(models, subset, kind, sw_tmax, pc, sw_tmin);
        if (sw_baseline) {
          PredictorModels f1{train_f1_baseline(corpus.episodes, cfg.svm, sw_seed, cfg.attention), models.place};
          base = sweep_accuracy(f1, subset, kind, sw_tmax, pc, sw_tmin);
        }
      }
      write_text(sw_out, curve_to_csv(curve));
      const double chance = kind == ActionKind::Pick ? 0.25 : mean_chance(subset);
      std::cout << "episodes " << subset.size() << ", chance " << chance << ", skipped points " << curve.skipped << '\n';
      if (!curve.accuracy.empty()) {
        std::cout << "accuracy at t_prior=" << curve.t_prior.front() << ": " << curve.accuracy.front()
                  << ", at t_prior=" << curve.t_prior.back() << ": " << curve.accuracy.back() << '\n';
      }
      std::vector<PlotSeries> series{{kind == ActionKind::Pick ? "F1+F2" : "F1", &curve}};
      if (base) {
        auto stem = std::filesystem::path(sw_out).replace_extension().string();
        write_text(stem + ".baseline.csv", curve_to_csv(*base));
        auto cmp = compare_curves(curve, *base);
        std::cout << "comparison " << comparison_to_json(cmp).dump() << '\n';
        series.push_back({"F1 only", &*base});
      }
      if (!sw_svg.empty()) write_text(sw_svg, render_svg(series, chance, std::string(to_string(kind)) + " accuracy vs t_prior"));
      return 0;
    }

    if (*sim) {
      auto modes = parse_modes(sim_mode);
      print_config(cfg, {{"name", "simulate"}, {"mode", sim_mode}, {"boards", sim_boards}, {"seed", sim_seed},
                         {"models", sim_models}, {"train_seed", sim_train_seed}});
      PredictorModels models;
      if (!sim_models.empty()) {
        models = load_models(sim_models);
      } else if (sim_boards > 0) {
        auto corpus = generate_corpus(cfg.user, 912, sim_train_seed, standard_layout(), cfg.attention);
        models = train_predictors(corpus.episodes, cfg.svm, sim_train_seed, cfg.attention);
      }
      SimulationReport report;
      report.seed = sim_seed;
      if (sim_boards > 0) report = simulate(models, modes, sim_boards, sim_seed, cfg.simulation());
      std::cout << "boards " << report.boards << ", mean completion time " << report.mean_completion_time << " s\n";
      for (const auto& m : report.modes) {
        std::cout << "  " << to_string(m.mode) << ": match rate " << m.match_rate << ", corrective moves "
                  << m.corrective_moves << ", mean time to commit " << m.mean_time_to_commit << " s\n";
      }
      std::cout << simulation_to_json(report).dump() << '\n';
      return 0;
    }

    if (*serve) {
      auto [host, port] = parse_addr(sv_addr);
      print_config(cfg, {{"name", "serve"}, {"models", sv_models}, {"addr", sv_addr}, {"log_dir", sv_logs}});
      auto models = std::make_shared<const PredictorModels>(load_models(sv_models));
      ServerOptions opts{host, port, sv_logs, cfg.session()};
      WireServer server(models, opts);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on " << host << ':' << server.port() << " (model " << models_hash(*models) << ")" << std::endl;
      server.run();
      server.stop();
      g_server = nullptr;
      return 0;
    }

    if (*rep) {
      print_config(cfg, {{"name", "replay"}, {"log", rp_log}, {"models", rp_models}});
      auto models = std::make_shared<const PredictorModels>(load_models(rp_models));
      auto r = replay_file(rp_log, models);
      std::cout << summary_to_json(r.summary).dump() << '\n';
      std::cout << "messages " << r.messages << ", deterministic " << (r.identical ? "yes" : "no") << '\n';
      if (!r.identical) {
        std::cerr << "replay diverged at response " << r.first_divergence.value_or(0) << '\n';
        return kExitData;
      }
      return 0;
    }

    if (*drive) {
      auto [host, port] = parse_addr(dr_addr);
      Mode mode = mode_from_string(dr_mode);
      print_config(cfg, {{"name", "drive"}, {"addr", dr_addr}, {"seed", dr_seed}, {"mode", dr_mode}});
      WireClient client;
      client.connect(host, port);
      auto summary = drive_synthetic_session([&](const json& m) { return client.send(m); }, dr_seed, mode, cfg.user,
                                             cfg.attention);
      client.close();
      std::cout << summary.dump() << '\n';
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
