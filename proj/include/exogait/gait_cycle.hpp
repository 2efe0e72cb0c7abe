#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exogait/trial.hpp"

namespace exogait {

inline constexpr std::size_t kCycleSamples = 101;

enum class FootOffStatus { Unique, Missing, Multiple };

/// One stride between consecutive ipsilateral foot strikes.
struct Stride {
  Side side = Side::Left;
  double start_time = 0.0;
  double end_time = 0.0;
  std::optional<double> foot_off_time;
  FootOffStatus foot_off_status = FootOffStatus::Missing;

  /// True when the stride had zero or several interior foot-offs.
  bool flagged() const { return foot_off_status != FootOffStatus::Unique; }
};

/// A uniformly sampled scalar channel. `valid` is empty (all valid) or one flag per sample.
struct SampledSeries {
  std::vector<double> samples;
  double rate = 0.0;
  double start_time = 0.0;
  std::vector<bool> valid;

  double end_time() const;
};

struct NormalizedCycle {
  std::string variable;
  std::string units;
  std::array<double, kCycleSamples> samples{};
};

struct TemporalFeatures {
  double cycle_duration = 0.0;
  double stance_duration = 0.0;
  double swing_duration = 0.0;
  double stance_pct = 0.0;
  double swing_pct = 0.0;
};

/// Angle convention: dorsiflexion positive. Moment convention: internal
/// plantarflexor moment positive.
struct CycleFeatures {
  double rom = 0.0;
  double peak_dorsiflexion = 0.0;
  double peak_plantarflexion = 0.0;
  std::optional<double> peak_plantarflexion_moment;
};

struct Ensemble {
  NormalizedCycle mean;
  NormalizedCycle sd;
  std::size_t count = 0;
};

std::vector<Stride> segment_strides(std::span<const GaitEvent> events, Side side);

/// True when any sample used to interpolate inside the stride is a gap.
bool stride_has_gap(const SampledSeries& series, const Stride& stride);

/// Resamples the stride to 101 points at start + k (end - start) / 100 by linear
/// interpolation. Throws StrideOutsideSeries or GapInStride.
NormalizedCycle normalize_cycle(const SampledSeries& series, const Stride& stride,
                                std::string variable = {}, std::string units = {});

TemporalFeatures temporal_params(const Stride& stride);

CycleFeatures cycle_features(const NormalizedCycle& angle, const NormalizedCycle* moment = nullptr);

/// Pointwise mean and sample SD (SD = 0 for a single cycle).
Ensemble ensemble(std::span<const NormalizedCycle> cycles);

}  // namespace exogait
