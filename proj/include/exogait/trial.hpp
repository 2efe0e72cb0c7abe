#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace exogait {

enum class Side { Left, Right };
enum class EventKind { FootStrike, FootOff };

std::string_view to_string(Side side) noexcept;
std::string_view to_string(EventKind kind) noexcept;

/// One marker sample in mm. `valid == false` marks a gap; coordinates are then meaningless.
struct PointFrame {
  std::array<double, 3> xyz{0.0, 0.0, 0.0};
  bool valid = false;
  /// Raw residual/camera-mask word from the source file. Not written back.
  float residual = 0.0f;

  friend bool operator==(const PointFrame&, const PointFrame&) = default;
};

struct MarkerTrajectory {
  std::string label;
  std::vector<PointFrame> frames;

  std::size_t valid_count() const;
  /// One coordinate axis (0 = x, 1 = y, 2 = z) as a plain series; gap frames hold NaN.
  std::vector<double> axis(int component) const;
};

struct AnalogChannel {
  std::string label;
  std::string units;
  std::vector<double> samples;
  double rate = 0.0;
};

struct GaitEvent {
  Side side = Side::Left;
  EventKind kind = EventKind::FootStrike;
  double time = 0.0;

  friend bool operator==(const GaitEvent&, const GaitEvent&) = default;
};

/// An event as stored in a C3D EVENT group: free-text context and label.
struct EventRecord {
  std::string context;
  std::string label;
  double time = 0.0;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

/// Canonical stored form of a typed event ("Left"/"Right", "Foot Strike"/"Foot Off").
EventRecord to_record(const GaitEvent& event);

struct Trial {
  std::vector<MarkerTrajectory> markers;
  std::vector<AnalogChannel> analogs;
  std::vector<EventRecord> events;
  double point_rate = 0.0;
  double analog_rate = 0.0;
  std::int64_t first_frame = 1;
  std::int64_t last_frame = 0;
  std::map<std::string, std::string> subject_meta;

  std::size_t frame_count() const {
    return last_frame >= first_frame ? static_cast<std::size_t>(last_frame - first_frame + 1) : 0;
  }
  /// Analog samples per point frame; 1 when there are no points.
  std::size_t analog_ratio() const;
  /// Time in seconds of the first stored frame (frame numbers are 1-based).
  double start_time() const;

  const MarkerTrajectory* find_marker(std::string_view label) const;
  const AnalogChannel* find_analog(std::string_view label) const;

  /// Throws InvalidArgument when the structural invariants do not hold.
  void validate() const;
};

}  // namespace exogait
