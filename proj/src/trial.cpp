#include "exogait/trial.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "exogait/error.hpp"

namespace exogait {

std::string_view to_string(Side side) noexcept {
  return side == Side::Left ? "Left" : "Right";
}

std::string_view to_string(EventKind kind) noexcept {
  return kind == EventKind::FootStrike ? "Foot Strike" : "Foot Off";
}

EventRecord to_record(const GaitEvent& event) {
  return {std::string(to_string(event.side)), std::string(to_string(event.kind)), event.time};
}

std::size_t MarkerTrajectory::valid_count() const {
  std::size_t n = 0;
  for (const auto& f : frames) n += f.valid ? 1 : 0;
  return n;
}

std::vector<double> MarkerTrajectory::axis(int component) const {
  std::vector<double> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    out.push_back(f.valid ? f.xyz[static_cast<std::size_t>(component)]
                          : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

std::size_t Trial::analog_ratio() const {
  if (point_rate <= 0.0 || analog_rate <= 0.0) return 1;
  return static_cast<std::size_t>(std::llround(analog_rate / point_rate));
}

double Trial::start_time() const {
  if (point_rate <= 0.0) return 0.0;
  return static_cast<double>(first_frame - 1) / point_rate;
}

const MarkerTrajectory* Trial::find_marker(std::string_view label) const {
  for (const auto& m : markers) {
    if (m.label == label) return &m;
  }
  return nullptr;
}

const AnalogChannel* Trial::find_analog(std::string_view label) const {
  for (const auto& a : analogs) {
    if (a.label == label) return &a;
  }
  return nullptr;
}

void Trial::validate() const {
  if (point_rate <= 0.0 || !std::isfinite(point_rate)) {
    throw Error(ErrorCode::InvalidArgument, "point_rate must be positive");
  }
  if (!analogs.empty()) {
    const double ratio = analog_rate / point_rate;
    if (analog_rate <= 0.0 || std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0) {
      throw Error(ErrorCode::InvalidArgument, "analog_rate must be an integer multiple of point_rate");
    }
  }
  const std::size_t frames = frame_count();
  std::set<std::string_view> labels;
  for (const auto& m : markers) {
    if (m.label.empty()) throw Error(ErrorCode::InvalidArgument, "marker label is empty");
    if (!labels.insert(m.label).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate marker label '" + m.label + "'");
    }
    if (m.frames.size() != frames) {
      throw Error(ErrorCode::InvalidArgument, "marker '" + m.label + "' frame count does not match trial");
    }
  }
  const std::size_t ratio = analog_ratio();
  for (const auto& a : analogs) {
    if (a.label.empty()) throw Error(ErrorCode::InvalidArgument, "analog label is empty");
    if (a.samples.size() != frames * ratio) {
      throw Error(ErrorCode::InvalidArgument, "analog '" + a.label + "' sample count does not match trial");
    }
  }
  for (const auto& e : events) {
    if (!(e.time >= 0.0)) throw Error(ErrorCode::InvalidArgument, "event time must be >= 0");
  }
}

}  // namespace exogait
