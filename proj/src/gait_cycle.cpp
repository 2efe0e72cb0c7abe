#include "exogait/gait_cycle.hpp"

#include <algorithm>
#include <cmath>

#include "exogait/error.hpp"

namespace exogait {
namespace {

// Boundary tolerance: a stride may end a hair past the last sample time.
constexpr double kTimeSlack = 1e-9;

double frame_position(const SampledSeries& s, double t) {
  double pos = (t - s.start_time) * s.rate;
  const double nearest = std::round(pos);
  if (std::abs(pos - nearest) < 1e-9) pos = nearest;
  return pos;
}

}  // namespace

double SampledSeries::end_time() const {
  if (samples.empty() || rate <= 0.0) return start_time;
  return start_time + static_cast<double>(samples.size() - 1) / rate;
}

std::vector<Stride> segment_strides(std::span<const GaitEvent> events, Side side) {
  std::vector<GaitEvent> own;
  for (const auto& e : events) {
    if (e.side == side) own.push_back(e);
  }
  std::stable_sort(own.begin(), own.end(), [](const auto& a, const auto& b) { return a.time < b.time; });

  std::vector<double> strikes;
  std::vector<double> offs;
  for (const auto& e : own) {
    (e.kind == EventKind::FootStrike ? strikes : offs).push_back(e.time);
  }

  std::vector<Stride> out;
  for (std::size_t i = 0; i + 1 < strikes.size(); ++i) {
    if (!(strikes[i] < strikes[i + 1])) continue;
    Stride s;
    s.side = side;
    s.start_time = strikes[i];
    s.end_time = strikes[i + 1];
    std::size_t interior = 0;
    double off = 0.0;
    for (double t : offs) {
      if (t > s.start_time && t < s.end_time) {
        ++interior;
        off = t;
      }
    }
    if (interior == 1) {
      s.foot_off_time = off;
      s.foot_off_status = FootOffStatus::Unique;
    } else {
      s.foot_off_status = interior == 0 ? FootOffStatus::Missing : FootOffStatus::Multiple;
    }
    out.push_back(s);
  }
  return out;
}

bool stride_has_gap(const SampledSeries& series, const Stride& stride) {
  if (series.valid.empty()) return false;
  const double p0 = frame_position(series, stride.start_time);
  const double p1 = frame_position(series, stride.end_time);
  const auto last = static_cast<std::ptrdiff_t>(series.samples.size()) - 1;
  const auto i0 = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(std::floor(p0)), 0, last);
  const auto i1 = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(std::ceil(p1)), 0, last);
  for (auto i = i0; i <= i1; ++i) {
    if (!series.valid[static_cast<std::size_t>(i)]) return true;
  }
  return false;
}

NormalizedCycle normalize_cycle(const SampledSeries& series, const Stride& stride, std::string variable,
                                std::string units) {
  if (!(series.rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "series rate must be positive");
  if (!(stride.start_time < stride.end_time)) {
    throw Error(ErrorCode::InvalidArgument, "stride start must precede its end");
  }
  if (series.samples.empty() || stride.start_time < series.start_time - kTimeSlack ||
      stride.end_time > series.end_time() + kTimeSlack) {
    throw Error(ErrorCode::StrideOutsideSeries, "stride is not covered by the sampled series");
  }
  if (!series.valid.empty() && series.valid.size() != series.samples.size()) {
    throw Error(ErrorCode::InvalidArgument, "validity mask length mismatch");
  }
  if (stride_has_gap(series, stride)) {
    throw Error(ErrorCode::GapInStride, "stride contains gap frames");
  }

  NormalizedCycle out;
  out.variable = std::move(variable);
  out.units = std::move(units);
  const double span = stride.end_time - stride.start_time;
  const std::size_t last = series.samples.size() - 1;
  for (std::size_t k = 0; k < kCycleSamples; ++k) {
    const double t = stride.start_time + static_cast<double>(k) * span / 100.0;
    const double pos = std::clamp(frame_position(series, t), 0.0, static_cast<double>(last));
    const auto i = std::min(static_cast<std::size_t>(std::floor(pos)), last);
    const double frac = pos - static_cast<double>(i);
    if (frac == 0.0 || i == last) {
      out.samples[k] = series.samples[i];
    } else {
      out.samples[k] = series.samples[i] + frac * (series.samples[i + 1] - series.samples[i]);
    }
  }
  return out;
}

TemporalFeatures temporal_params(const Stride& stride) {
  if (!stride.foot_off_time) throw Error(ErrorCode::MissingFootOff, "stride has no unique foot-off");
  TemporalFeatures f;
  f.cycle_duration = stride.end_time - stride.start_time;
  f.stance_duration = *stride.foot_off_time - stride.start_time;
  // Complements are taken by subtraction so the identities hold exactly.
  f.swing_duration = f.cycle_duration - f.stance_duration;
  f.stance_pct = 100.0 * f.stance_duration / f.cycle_duration;
  f.swing_pct = 100.0 - f.stance_pct;
  return f;
}

CycleFeatures cycle_features(const NormalizedCycle& angle, const NormalizedCycle* moment) {
  const auto [lo, hi] = std::minmax_element(angle.samples.begin(), angle.samples.end());
  CycleFeatures f;
  f.rom = *hi - *lo;
  f.peak_dorsiflexion = *hi;
  f.peak_plantarflexion = -*lo;
  if (moment != nullptr) {
    f.peak_plantarflexion_moment = *std::max_element(moment->samples.begin(), moment->samples.end());
  }
  return f;
}

Ensemble ensemble(std::span<const NormalizedCycle> cycles) {
  if (cycles.empty()) throw Error(ErrorCode::InvalidArgument, "ensemble needs at least one cycle");
  for (const auto& c : cycles) {
    if (c.variable != cycles.front().variable) {
      throw Error(ErrorCode::MixedVariables,
                  "cannot average '" + c.variable + "' with '" + cycles.front().variable + "'");
    }
  }
  Ensemble e;
  e.count = cycles.size();
  e.mean.variable = e.sd.variable = cycles.front().variable;
  e.mean.units = e.sd.units = cycles.front().units;
  const double n = static_cast<double>(cycles.size());
  for (std::size_t k = 0; k < kCycleSamples; ++k) {
    double sum = 0.0;
    for (const auto& c : cycles) sum += c.samples[k];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& c : cycles) ss += (c.samples[k] - mean) * (c.samples[k] - mean);
    e.mean.samples[k] = mean;
    e.sd.samples[k] = cycles.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  }
  return e;
}

}  // namespace exogait
