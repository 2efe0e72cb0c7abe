#pragma once

namespace exogait {

inline constexpr double kStandardGravity = 9.80665;  // m/s^2

/// Ankle moment arm implied by 17 kg of cable tension producing 10 Nm.
inline constexpr double kDefaultMomentArm = 10.0 / (17.0 * kStandardGravity);

/// Plantarflexion assistance: zero outside [onset, end], smoothstep rise to the
/// peak at peak_gc and smoothstep fall back to zero. Timings in GC%.
struct TorqueProfile {
  double onset_gc = 23.2;
  double peak_gc = 50.4;
  double end_gc = 62.7;
  double peak_torque = 10.0;  ///< Nm

  /// Builds a profile from a peak timing plus rise and fall durations (all GC%).
  static TorqueProfile from_durations(double peak_gc, double rise_duration, double fall_duration,
                                      double peak_torque);

  /// Throws InvalidProfile unless 0 <= onset < peak < end <= 100 and peak_torque >= 0.
  void validate() const;
};

struct TensionConversion {
  double moment_arm = kDefaultMomentArm;  ///< m
  double g = kStandardGravity;

  void validate() const;
  double kg_to_newton(double kg) const { return kg * g; }
};

double torque_at(const TorqueProfile& profile, double gc);
double torque_to_tension(double torque, const TensionConversion& conv);
double tension_to_torque(double tension, const TensionConversion& conv);
double reference_tension(const TorqueProfile& profile, const TensionConversion& conv, double gc);

}  // namespace exogait
