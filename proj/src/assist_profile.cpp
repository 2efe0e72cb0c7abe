#include "exogait/assist_profile.hpp"

#include <cmath>
#include <string>

#include "exogait/error.hpp"

namespace exogait {
namespace {

double smoothstep(double u) { return u * u * (3.0 - 2.0 * u); }

}  // namespace

TorqueProfile TorqueProfile::from_durations(double peak_gc, double rise_duration, double fall_duration,
                                            double peak_torque) {
  TorqueProfile p{peak_gc - rise_duration, peak_gc, peak_gc + fall_duration, peak_torque};
  p.validate();
  return p;
}

void TorqueProfile::validate() const {
  const bool ok = std::isfinite(onset_gc) && std::isfinite(end_gc) && std::isfinite(peak_torque) &&
                  onset_gc >= 0.0 && onset_gc < peak_gc && peak_gc < end_gc && end_gc <= 100.0 &&
                  peak_torque >= 0.0;
  if (!ok) {
    throw Error(ErrorCode::InvalidProfile,
                "profile needs 0 <= onset < peak < end <= 100 and peak torque >= 0 (got " +
                    std::to_string(onset_gc) + ", " + std::to_string(peak_gc) + ", " + std::to_string(end_gc) +
                    ", " + std::to_string(peak_torque) + ")");
  }
}

void TensionConversion::validate() const {
  if (!(moment_arm > 0.0) || !std::isfinite(moment_arm)) {
    throw Error(ErrorCode::InvalidArgument, "moment arm must be positive");
  }
  if (!(g > 0.0)) throw Error(ErrorCode::InvalidArgument, "g must be positive");
}

double torque_at(const TorqueProfile& profile, double gc) {
  profile.validate();
  if (!(gc >= 0.0 && gc <= 100.0)) throw Error(ErrorCode::InvalidArgument, "gait cycle percentage must lie in [0, 100]");
  if (gc <= profile.onset_gc || gc >= profile.end_gc) return 0.0;
  if (gc == profile.peak_gc) return profile.peak_torque;
  if (gc < profile.peak_gc) {
    const double u = (gc - profile.onset_gc) / (profile.peak_gc - profile.onset_gc);
    return profile.peak_torque * smoothstep(u);
  }
  const double u = (profile.end_gc - gc) / (profile.end_gc - profile.peak_gc);
  return profile.peak_torque * smoothstep(u);
}

double torque_to_tension(double torque, const TensionConversion& conv) {
  conv.validate();
  if (!(torque >= 0.0)) throw Error(ErrorCode::InvalidArgument, "torque must be >= 0");
  return torque / conv.moment_arm;
}

double tension_to_torque(double tension, const TensionConversion& conv) {
  conv.validate();
  if (!(tension >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tension must be >= 0");
  return tension * conv.moment_arm;
}

double reference_tension(const TorqueProfile& profile, const TensionConversion& conv, double gc) {
  return torque_to_tension(torque_at(profile, gc), conv);
}

}  // namespace exogait
