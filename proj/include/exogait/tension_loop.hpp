#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "exogait/assist_profile.hpp"
#include "exogait/gait_phase.hpp"

namespace exogait {

/// PID with feedforward. Errors are in N, the command is motor torque in Nm.
struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  double ff_gain = 0.0;
  double output_min = -8.0;
  double output_max = 8.0;
  double integrator_limit = 1e9;
  /// Tension-to-torque map of the feedforward arm (the pulley radius).
  double ff_arm = 0.04;

  /// Gains tuned once against the nominal plant and frozen.
  static PidGains tuned_defaults();
  void validate() const;
};

struct PidState {
  double integral = 0.0;
  double prev_error = 0.0;
  double derivative = 0.0;  ///< low-pass filtered error rate
  bool primed = false;
};

struct PidStep {
  PidState state;
  double command = 0.0;
};

/// e = ref - meas; command = ff_gain * ff_arm * ref + kp e + ki int(e) + kd de/dt,
/// clamped to the output limits. The integrator is clamped to +-integrator_limit
/// and frozen while the output saturates in the direction of the error. The
/// derivative is filtered with time constant 10 dt.
PidStep pid_step(const PidGains& gains, PidState state, double ref, double meas, double dt);

struct PlantParams {
  double inertia = 0.02;          ///< kg m^2
  double viscous = 0.01;          ///< Nm s
  double pulley_radius = 0.04;    ///< m
  double cable_stiffness = 20000; ///< N/m
  double cable_damping = 50;      ///< N s/m
  double sheath_mu = 0.10;
  double wrap_angle = 3.141592653589793;  ///< rad
  double loadcell_noise_sd = 1.0; ///< N
  double loadcell_max = 500.0;    ///< N, sensor capacity
  double torque_max = 8.0;        ///< Nm
  double control_rate = 500.0;    ///< Hz
  double pretension = 5.0;        ///< N
  int substeps = 10;              ///< plant integration steps per control period
  double slide_deadband = 1e-4;   ///< m/s

  void validate() const;
  double rest_stretch() const { return pretension / cable_stiffness; }
};

struct PlantState {
  double time = 0.0;
  double theta = 0.0;   ///< rad
  double omega = 0.0;   ///< rad/s
  double anchor_pos = 0.0;  ///< m, positive toward the pulley (shortens the cable path)
  double anchor_vel = 0.0;
  double tension_motor = 0.0;     ///< N, pulley side
  double tension_true = 0.0;      ///< N, at the load cell
  double tension_measured = 0.0;  ///< N
  double motor_work = 0.0;   ///< J delivered by the motor torque
  double anchor_work = 0.0;  ///< J delivered by the cable to the heel anchor
};

/// Anchor displacement as a function of time.
using AnchorMotion = std::function<double(double)>;

/// Rest state holding the pretension with the anchor at `anchor(0)`.
PlantState initial_plant_state(const PlantParams& params, const AnchorMotion& anchor);

double plant_energy(const PlantParams& params, const PlantState& state);

/// Advances the plant by dt (<= 1 / control_rate) with semi-implicit Euler substeps.
/// The command is clamped to +-torque_max. Throws NonFiniteState on divergence.
PlantState plant_step(const PlantParams& params, PlantState state, double command, const AnchorMotion& anchor,
                      double dt, std::mt19937_64& rng);

/// Ankle angle (deg, dorsiflexion positive) of the synthetic gait at a GC%.
double synthetic_ankle_angle(double gc);
/// Heel FSR level (0..1) of the synthetic gait at a GC%.
double synthetic_heel_load(double gc);

struct SimConfig {
  int n_cycles = 10;
  std::uint64_t seed = 1;
  double stride_duration = 0.980;  ///< s
  double stride_jitter = 0.0;      ///< fraction, uniform +-
  /// Cable path change per radian of ankle rotation (m/rad). 0 holds the anchor still.
  double anchor_scale = kDefaultMomentArm;
  double fsr_noise_sd = 0.0;
  /// Replaces the profile-driven reference with a constant tension (N).
  std::optional<double> constant_reference;
};

struct CycleSummary {
  int index = 0;
  double start = 0.0;
  double end = 0.0;
  double rms_error = 0.0;
  double peak_error = 0.0;
  double mean_tension = 0.0;
  double peak_reference = 0.0;
  double peak_measured = 0.0;
};

struct SimResult {
  std::vector<double> time;
  std::vector<double> fsr;
  std::vector<double> gc;
  std::vector<double> reference;
  std::vector<double> measured;
  std::vector<double> tension_true;
  std::vector<double> command;
  std::vector<double> cycle_starts;     ///< true synthetic heel strikes
  std::vector<double> detected_strikes;
  double rms_error = 0.0;
  double peak_error = 0.0;
  std::vector<CycleSummary> cycles;
  double motor_work = 0.0;
  double anchor_work = 0.0;
};

SimResult run_simulation(const TorqueProfile& profile, const TensionConversion& conv, const PidGains& gains,
                         const PlantParams& params, const FsrConfig& phase_cfg, const SimConfig& config);

struct TrackingMetrics {
  double rms_error = 0.0;
  double peak_error = 0.0;
  std::vector<CycleSummary> cycles;
};

/// RMS and max of |measured - reference| over cycles 2 onward (all samples when
/// there is a single cycle). Throws EmptyResult on an empty series.
TrackingMetrics tracking_metrics(const SimResult& result);

}  // namespace exogait
