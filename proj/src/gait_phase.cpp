#include "exogait/gait_phase.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "exogait/error.hpp"

namespace exogait {

void FsrConfig::validate() const {
  if (!(threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "FSR threshold must be positive");
  if (!(refractory > 0.0)) throw Error(ErrorCode::InvalidArgument, "refractory period must be positive");
  if (debounce_samples < 1) throw Error(ErrorCode::InvalidArgument, "debounce needs at least one sample");
}

HeelStrikeDetector::HeelStrikeDetector(FsrConfig cfg) : cfg_(cfg) { cfg_.validate(); }

std::optional<double> HeelStrikeDetector::push(double t, double value) {
  if (!(value > cfg_.threshold)) {
    armed_ = true;
    run_ = 0;
    return std::nullopt;
  }
  if (!armed_) return std::nullopt;
  if (run_ == 0) run_start_ = t;
  if (++run_ < cfg_.debounce_samples) return std::nullopt;

  // The run is confirmed; either way it must end before another can count.
  armed_ = false;
  run_ = 0;
  if (last_strike_ && run_start_ - *last_strike_ < cfg_.refractory) return std::nullopt;
  last_strike_ = run_start_;
  return run_start_;
}

std::vector<double> detect_heel_strikes(std::span<const double> fsr, double rate, const FsrConfig& cfg) {
  if (!(rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "rate must be positive");
  HeelStrikeDetector det(cfg);
  std::vector<double> out;
  for (std::size_t i = 0; i < fsr.size(); ++i) {
    if (auto t = det.push(static_cast<double>(i) / rate, fsr[i])) out.push_back(*t);
  }
  return out;
}

double PhaseState::expected_stride() const {
  if (stride_buffer.empty()) return default_stride;
  return std::accumulate(stride_buffer.begin(), stride_buffer.end(), 0.0) /
         static_cast<double>(stride_buffer.size());
}

PhaseUpdate update_phase(PhaseState state, double now, bool heel_strike) {
  if (state.last_update && now < *state.last_update) {
    throw Error(ErrorCode::TimeWentBackwards, "phase estimator time went backwards");
  }
  state.last_update = now;
  if (heel_strike) {
    if (state.last_hs_time) {
      const double stride = now - *state.last_hs_time;
      if (stride > 0.0) {
        state.stride_buffer.push_back(stride);
        const std::size_t cap = std::max<std::size_t>(state.buffer_capacity, 1);
        if (state.stride_buffer.size() > cap) {
          state.stride_buffer.erase(state.stride_buffer.begin(),
                                    state.stride_buffer.end() - static_cast<std::ptrdiff_t>(cap));
        }
      }
    }
    state.last_hs_time = now;
    return {std::move(state), 0.0};
  }
  if (!state.last_hs_time) return {std::move(state), 0.0};
  const double gc = 100.0 * (now - *state.last_hs_time) / state.expected_stride();
  return {std::move(state), std::clamp(gc, 0.0, 100.0)};
}

}  // namespace exogait
