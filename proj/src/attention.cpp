#include "gazeintent/attention.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gazeintent/errors.hpp"

namespace gazeintent {

namespace {
constexpr std::size_t kParallelWork = 1 << 15;
}  // namespace

void AttentionConfig::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("attention sigma must be positive");
  if (!(frame > 0.0) || !(window > 0.0)) throw ConfigError("attention window and frame must be positive");
  if (samples_per_window < 1 || samples_per_window != static_cast<int>(std::lround(window / frame))) {
    throw ConfigError("samples_per_window must equal round(window / frame)");
  }
}

nlohmann::json attention_config_to_json(const AttentionConfig& c) {
  return {{"sigma", c.sigma}, {"window", c.window}, {"samples_per_window", c.samples_per_window}, {"frame", c.frame}};
}

AttentionConfig attention_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("attention settings must be an object");
  AttentionConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "sigma") c.sigma = v.get<double>();
      else if (key == "window") c.window = v.get<double>();
      else if (key == "samples_per_window") c.samples_per_window = v.get<int>();
      else if (key == "frame") c.frame = v.get<double>();
      else throw ConfigError("unknown attention setting '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed attention settings: ") + e.what());
  }
  c.validate();
  return c;
}

double VisualAttentionProfile::mean() const {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

GazeTrace::GazeTrace(std::size_t capacity) : buffer_(std::max<std::size_t>(capacity, 1)) {}

void GazeTrace::push(const GazeSample& s) {
  if (size_ > 0 && s.t < back().t) {
    throw OutOfOrderError("gaze sample at t=" + std::to_string(s.t) + " precedes t=" + std::to_string(back().t));
  }
  if (size_ < buffer_.size()) {
    buffer_[(head_ + size_) % buffer_.size()] = s;
    ++size_;
  } else {
    buffer_[head_] = s;
    head_ = (head_ + 1) % buffer_.size();
  }
}

void GazeTrace::clear() {
  head_ = 0;
  size_ = 0;
}

std::vector<GazeSample> GazeTrace::samples() const {
  std::vector<GazeSample> out;
  out.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) out.push_back((*this)[i]);
  return out;
}

std::size_t trace_capacity_for(double seconds, const AttentionConfig& cfg) {
  auto frames = static_cast<std::size_t>(std::ceil(seconds / cfg.frame)) + 2;
  return std::max(frames, static_cast<std::size_t>(cfg.samples_per_window) + 2);
}

double gaze_distance(Vec2 gaze_pos, Vec2 object_pos) { return distance(gaze_pos, object_pos); }

double attention_sample(double d, double sigma) { return std::exp(-(d * d) / (2.0 * sigma * sigma)); }

std::int64_t frame_index(double t, const AttentionConfig& cfg) { return std::llround(t / cfg.frame); }

std::vector<double> attention_series(const GazeTrace& trace, Vec2 object_pos, std::int64_t first_slot,
                                     std::size_t count, const AttentionConfig& cfg) {
  if (trace.empty()) throw EmptyTraceError("gaze trace holds no samples");
  std::vector<double> out(count, 0.0);
  const double tol = cfg.frame * (1.0 + 1e-9);
  const std::size_t n = trace.size();

  // First sample that can match the first slot.
  double first_time = static_cast<double>(first_slot) * cfg.frame;
  std::size_t lo = 0;
  {
    std::size_t a = 0, b = n;
    while (a < b) {
      std::size_t mid = (a + b) / 2;
      if (trace[mid].t < first_time - tol) a = mid + 1; else b = mid;
    }
    lo = a;
  }

  for (std::size_t k = 0; k < count; ++k) {
    double ts = static_cast<double>(first_slot + static_cast<std::int64_t>(k)) * cfg.frame;
    while (lo < n && trace[lo].t < ts - tol) ++lo;
    double best_dt = tol + 1.0;
    const GazeSample* best = nullptr;
    for (std::size_t j = lo; j < n && trace[j].t <= ts + tol; ++j) {
      const auto& s = trace[j];
      if (!s.valid || !s.pos.finite()) continue;
      double dt = std::abs(s.t - ts);
      if (dt < best_dt) {
        best_dt = dt;
        best = &s;
      }
    }
    if (best) out[k] = attention_sample(gaze_distance(best->pos, object_pos), cfg.sigma);
  }
  return out;
}

VisualAttentionProfile compute_vap(const GazeTrace& trace, Vec2 object_pos, double window_end,
                                   const AttentionConfig& cfg) {
  if (trace.empty()) throw EmptyTraceError("gaze trace holds no samples");
  if (window_end > trace.back().t + cfg.frame * (1.0 + 1e-9)) {
    throw DataError("window_end lies beyond the newest gaze sample");
  }
  std::int64_t end = frame_index(window_end, cfg);
  VisualAttentionProfile vap;
  vap.window_end = static_cast<double>(end) * cfg.frame;
  vap.values = attention_series(trace, object_pos, end - cfg.samples_per_window + 1,
                                static_cast<std::size_t>(cfg.samples_per_window), cfg);
  return vap;
}

std::vector<VisualAttentionProfile> compute_vaps(const GazeTrace& trace, std::span<const ObjectId> ids,
                                                 const BoardLayout& layout, double window_end,
                                                 const AttentionConfig& cfg) {
  if (trace.empty()) throw EmptyTraceError("gaze trace holds no samples");
  std::vector<Vec2> pos(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) pos[i] = object_position(layout, ids[i]);

  std::vector<VisualAttentionProfile> out(ids.size());
  const auto count = static_cast<std::ptrdiff_t>(ids.size());
  // small requests (one live prediction) stay on the calling thread
  const bool wide = ids.size() * static_cast<std::size_t>(cfg.samples_per_window) >= kParallelWork;
#pragma omp parallel for schedule(static) if (wide)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    out[i] = compute_vap(trace, pos[i], window_end, cfg);
    out[i].object_id = ids[i];
  }
  return out;
}

std::vector<VisualAttentionProfile> compute_vaps_serial(const GazeTrace& trace, std::span<const ObjectId> ids,
                                                        const BoardLayout& layout, double window_end,
                                                        const AttentionConfig& cfg) {
  std::vector<VisualAttentionProfile> out;
  out.reserve(ids.size());
  for (ObjectId id : ids) {
    out.push_back(compute_vap(trace, object_position(layout, id), window_end, cfg));
    out.back().object_id = id;
  }
  return out;
}

nlohmann::json gaze_to_json(const GazeSample& s) {
  return {{"t", s.t}, {"x", s.pos.x}, {"y", s.pos.y}, {"valid", s.valid}};
}

GazeSample gaze_from_json(const nlohmann::json& j) {
  try {
    GazeSample s;
    s.t = j.at("t").get<double>();
    s.pos = {j.at("x").get<double>(), j.at("y").get<double>()};
    s.valid = j.value("valid", true);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed gaze record: ") + e.what());
  }
}

}  // namespace gazeintent
