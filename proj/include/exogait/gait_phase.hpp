#pragma once

#include <optional>
#include <span>
#include <vector>

namespace exogait {

struct FsrConfig {
  double threshold = 0.5;   ///< normalized FSR units
  double refractory = 0.4;  ///< s
  int debounce_samples = 3;

  void validate() const;
};

/// Streaming heel-strike detector. A strike is reported at the first sample of
/// a run of `debounce_samples` samples above threshold, at least `refractory`
/// seconds after the previous strike. The signal must fall to or below the
/// threshold before the next run can count.
class HeelStrikeDetector {
 public:
  explicit HeelStrikeDetector(FsrConfig cfg = {});

  /// Feeds one sample; returns the strike time when this sample confirms one.
  std::optional<double> push(double t, double value);

 private:
  FsrConfig cfg_;
  bool armed_ = true;
  int run_ = 0;
  double run_start_ = 0.0;
  std::optional<double> last_strike_;
};

std::vector<double> detect_heel_strikes(std::span<const double> fsr, double rate, const FsrConfig& cfg = {});

struct PhaseState {
  std::optional<double> last_hs_time;
  std::vector<double> stride_buffer;  ///< most recent last
  std::size_t buffer_capacity = 3;
  double default_stride = 0.980;  ///< s
  std::optional<double> last_update;

  double expected_stride() const;
};

struct PhaseUpdate {
  PhaseState state;
  double gc = 0.0;
};

/// Advances the estimator: GC% = 100 (now - last strike) / expected stride, clamped to [0, 100].
PhaseUpdate update_phase(PhaseState state, double now, bool heel_strike);

}  // namespace exogait
