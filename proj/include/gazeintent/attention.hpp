#pragma once

// Visual attention profiles: gaze-to-object distances mapped through a
// Gaussian falloff and resampled onto a fixed frame grid ending at the
// prediction time.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

#include "gazeintent/geometry.hpp"
#include "gazeintent/task_world.hpp"

namespace gazeintent {

struct GazeSample {
  double t = 0.0;  ///< seconds, non-decreasing within a stream
  Vec2 pos;        ///< millimetres on the task plane
  bool valid = true;

  friend bool operator==(const GazeSample&, const GazeSample&) = default;
};

struct AttentionConfig {
  double sigma = 60.0;         ///< mm
  double window = 4.0;         ///< seconds
  int samples_per_window = 300;
  double frame = 1.0 / 75.0;   ///< seconds (75 Hz)

  /// Throws ConfigError on sigma <= 0 or samples_per_window != round(window / frame).
  void validate() const;
};

[[nodiscard]] nlohmann::json attention_config_to_json(const AttentionConfig& c);
/// Missing keys keep their defaults; unknown keys throw ConfigError.
[[nodiscard]] AttentionConfig attention_config_from_json(const nlohmann::json& j);

struct VisualAttentionProfile {
  ObjectId object_id = -1;
  double window_end = 0.0;
  std::vector<double> values;

  [[nodiscard]] double mean() const;
};

/// Fixed-capacity ring buffer of gaze samples; the oldest sample is evicted first.
class GazeTrace {
 public:
  explicit GazeTrace(std::size_t capacity = 1024);

  /// Throws OutOfOrderError if `s.t` precedes the newest stored sample.
  void push(const GazeSample& s);
  void clear();

  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] std::size_t capacity() const { return buffer_.size(); }
  [[nodiscard]] bool empty() const { return size_ == 0; }
  /// Oldest-first logical indexing.
  [[nodiscard]] const GazeSample& operator[](std::size_t i) const {
    return buffer_[(head_ + i) % buffer_.size()];
  }
  [[nodiscard]] const GazeSample& front() const { return (*this)[0]; }
  [[nodiscard]] const GazeSample& back() const { return (*this)[size_ - 1]; }
  [[nodiscard]] std::vector<GazeSample> samples() const;

 private:
  std::vector<GazeSample> buffer_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

/// Capacity covering `seconds` of history at the configured frame rate (never below one window).
[[nodiscard]] std::size_t trace_capacity_for(double seconds, const AttentionConfig& cfg);

[[nodiscard]] double gaze_distance(Vec2 gaze_pos, Vec2 object_pos);

/// exp(-d^2 / (2 sigma^2)).
[[nodiscard]] double attention_sample(double d, double sigma);

/// Frame-grid index of a time: round(t / frame).
[[nodiscard]] std::int64_t frame_index(double t, const AttentionConfig& cfg);

/// Attention values for `count` consecutive grid slots starting at frame index
/// `first_slot`. Each slot takes the nearest-in-time valid sample within one
/// frame; slots without one hold 0. Throws EmptyTraceError on an empty trace.
[[nodiscard]] std::vector<double> attention_series(const GazeTrace& trace, Vec2 object_pos,
                                                   std::int64_t first_slot, std::size_t count,
                                                   const AttentionConfig& cfg);

/// The `samples_per_window` slots ending at window_end (quantized to the frame grid).
[[nodiscard]] VisualAttentionProfile compute_vap(const GazeTrace& trace, Vec2 object_pos, double window_end,
                                                 const AttentionConfig& cfg);

/// One profile per object over a shared read-only trace. OpenMP-parallel over objects.
[[nodiscard]] std::vector<VisualAttentionProfile> compute_vaps(const GazeTrace& trace,
                                                               std::span<const ObjectId> ids,
                                                               const BoardLayout& layout, double window_end,
                                                               const AttentionConfig& cfg);
/// Serial reference for compute_vaps.
[[nodiscard]] std::vector<VisualAttentionProfile> compute_vaps_serial(const GazeTrace& trace,
                                                                      std::span<const ObjectId> ids,
                                                                      const BoardLayout& layout, double window_end,
                                                                      const AttentionConfig& cfg);

/// JSONL gaze record {"t","x","y","valid"}.
[[nodiscard]] nlohmann::json gaze_to_json(const GazeSample& s);
[[nodiscard]] GazeSample gaze_from_json(const nlohmann::json& j);

}  // namespace gazeintent
