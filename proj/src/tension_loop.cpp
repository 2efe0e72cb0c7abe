#include "exogait/tension_loop.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "exogait/error.hpp"

namespace exogait {

// ---------------------------------------------------------------------------
// Controller

PidGains PidGains::tuned_defaults() {
  PidGains g;
  g.kp = 0.5;
  g.ki = 0.4;
  g.kd = 0.012;
  g.ff_gain = 1.0;
  g.output_min = -8.0;
  g.output_max = 8.0;
  g.integrator_limit = 10.0;
  g.ff_arm = 0.04;
  return g;
}

void PidGains::validate() const {
  if (!(output_min < output_max)) throw Error(ErrorCode::InvalidArgument, "output_min must be < output_max");
  if (kp < 0.0 || ki < 0.0 || kd < 0.0 || ff_gain < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "controller gains must be nonnegative");
  }
  if (!(integrator_limit >= 0.0)) throw Error(ErrorCode::InvalidArgument, "integrator_limit must be >= 0");
  if (!(ff_arm >= 0.0)) throw Error(ErrorCode::InvalidArgument, "ff_arm must be >= 0");
}

PidStep pid_step(const PidGains& gains, PidState state, double ref, double meas, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  const double e = ref - meas;
  if (!state.primed) {
    state.prev_error = e;
    state.primed = true;
  }
  // First-order filter on the raw difference, time constant 10 dt.
  const double raw_rate = (e - state.prev_error) / dt;
  constexpr double kAlpha = 1.0 / 11.0;
  state.derivative += kAlpha * (raw_rate - state.derivative);
  state.prev_error = e;

  const double ff = gains.ff_gain * gains.ff_arm * ref;
  const double candidate = std::clamp(state.integral + e * dt, -gains.integrator_limit, gains.integrator_limit);
  const double unclamped = ff + gains.kp * e + gains.ki * candidate + gains.kd * state.derivative;
  const bool wind_up = (unclamped > gains.output_max && e > 0.0) || (unclamped < gains.output_min && e < 0.0);
  if (!wind_up) state.integral = candidate;

  const double u = ff + gains.kp * e + gains.ki * state.integral + gains.kd * state.derivative;
  return {state, std::clamp(u, gains.output_min, gains.output_max)};
}

// ---------------------------------------------------------------------------
// Plant

void PlantParams::validate() const {
  const bool ok = inertia > 0.0 && viscous > 0.0 && pulley_radius > 0.0 && cable_stiffness > 0.0 &&
                  cable_damping > 0.0 && sheath_mu >= 0.0 && wrap_angle > 0.0 && loadcell_noise_sd >= 0.0 &&
                  loadcell_max > 0.0 && torque_max > 0.0 && control_rate > 0.0 && pretension > 0.0 &&
                  substeps >= 1 && slide_deadband > 0.0;
  if (!ok) throw Error(ErrorCode::InvalidArgument, "plant parameters must be positive (sheath_mu >= 0)");
}

namespace {

double stretch(const PlantParams& p, double theta, double anchor) {
  return p.pulley_radius * theta - anchor + p.rest_stretch();
}

// Pulley-side tension of a cable that can only pull.
double motor_side_tension(const PlantParams& p, double s, double s_rate) {
  if (s <= 0.0) return 0.0;
  return p.cable_stiffness * s + p.cable_damping * std::max(0.0, s_rate);
}

// Capstan factor from the distal slide direction: cable drawn toward the pulley
// loses tension along the sheath, cable drawn out by the anchor gains it.
double capstan_factor(const PlantParams& p, double anchor_vel) {
  const double dir = std::clamp(anchor_vel / p.slide_deadband, -1.0, 1.0);
  return std::exp(-p.sheath_mu * p.wrap_angle * dir);
}

void check_finite(const PlantState& s) {
  const std::array<double, 5> v{s.theta, s.omega, s.anchor_pos, s.tension_motor, s.tension_true};
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteState, "plant state diverged");
  }
}

}  // namespace

PlantState initial_plant_state(const PlantParams& params, const AnchorMotion& anchor) {
  params.validate();
  PlantState s;
  s.anchor_pos = anchor ? anchor(0.0) : 0.0;
  s.theta = s.anchor_pos / params.pulley_radius;
  s.tension_motor = params.pretension;
  s.tension_true = params.pretension;
  s.tension_measured = params.pretension;
  return s;
}

double plant_energy(const PlantParams& params, const PlantState& state) {
  const double s = std::max(0.0, stretch(params, state.theta, state.anchor_pos));
  return 0.5 * params.inertia * state.omega * state.omega + 0.5 * params.cable_stiffness * s * s;
}

PlantState plant_step(const PlantParams& params, PlantState state, double command, const AnchorMotion& anchor,
                      double dt, std::mt19937_64& rng) {
  params.validate();
  if (!(dt > 0.0) || dt > 1.0 / params.control_rate + 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "plant step must satisfy 0 < dt <= 1 / control_rate");
  }
  const double tau = std::clamp(command, -params.torque_max, params.torque_max);
  const int n = std::max(1, static_cast<int>(std::ceil(dt * params.control_rate * params.substeps - 1e-9)));
  const double h = dt / n;
  const double r = params.pulley_radius;

  for (int i = 0; i < n; ++i) {
    const double t_next = state.time + h;
    const double a_next = anchor ? anchor(t_next) : state.anchor_pos;
    const double a_vel = (a_next - state.anchor_pos) / h;

    const double s = stretch(params, state.theta, state.anchor_pos);
    const double s_rate = r * state.omega - a_vel;
    const double t_motor = motor_side_tension(params, s, s_rate);
    const double t_distal = t_motor * capstan_factor(params, a_vel);

    state.omega += h / params.inertia * (tau - params.viscous * state.omega - r * t_motor);
    const double dtheta = h * state.omega;
    state.theta += dtheta;
    state.motor_work += tau * dtheta;
    state.anchor_work += t_distal * (a_next - state.anchor_pos);
    state.anchor_pos = a_next;
    state.anchor_vel = a_vel;
    state.time = t_next;
    state.tension_motor = t_motor;
    state.tension_true = t_distal;
  }

  // Report the tension at the end of the step.
  const double s = stretch(params, state.theta, state.anchor_pos);
  state.tension_motor = motor_side_tension(params, s, r * state.omega - state.anchor_vel);
  state.tension_true = state.tension_motor * capstan_factor(params, state.anchor_vel);
  double noise = 0.0;
  if (params.loadcell_noise_sd > 0.0) {
    noise = std::normal_distribution<double>(0.0, params.loadcell_noise_sd)(rng);
  }
  state.tension_measured = std::clamp(state.tension_true + noise, 0.0, params.loadcell_max);
  check_finite(state);
  return state;
}

// ---------------------------------------------------------------------------
// Synthetic gait

namespace {

struct Knot {
  double gc;
  double value;
};

double smooth_knots(std::span<const Knot> knots, double gc) {
  if (gc <= knots.front().gc) return knots.front().value;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (gc <= knots[i].gc) {
      const double u = (gc - knots[i - 1].gc) / (knots[i].gc - knots[i - 1].gc);
      return knots[i - 1].value + (knots[i].value - knots[i - 1].value) * u * u * (3.0 - 2.0 * u);
    }
  }
  return knots.back().value;
}

constexpr std::array<Knot, 6> kAnkleKnots{{{0, 0}, {10, -5}, {48, 10}, {62, -15}, {75, 0}, {100, 0}}};
constexpr std::array<Knot, 5> kHeelKnots{{{0, 0}, {2, 1}, {35, 1}, {45, 0}, {100, 0}}};

class StrideClock {
 public:
  StrideClock(std::vector<double> starts, double end) : starts_(std::move(starts)), end_(end) {}

  // GC% of the true synthetic gait at time t.
  double gc(double t) const {
    if (t <= starts_.front()) return 0.0;
    if (t >= end_) return 100.0;
    auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - starts_.begin()) - 1;
    const double next = i + 1 < starts_.size() ? starts_[i + 1] : end_;
    return 100.0 * (t - starts_[i]) / (next - starts_[i]);
  }

  std::size_t cycle_of(double t) const {
    auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
    return it == starts_.begin() ? 0 : static_cast<std::size_t>(it - starts_.begin()) - 1;
  }

 private:
  std::vector<double> starts_;
  double end_;
};

}  // namespace

double synthetic_ankle_angle(double gc) { return smooth_knots(kAnkleKnots, gc); }

double synthetic_heel_load(double gc) { return smooth_knots(kHeelKnots, gc); }

SimResult run_simulation(const TorqueProfile& profile, const TensionConversion& conv, const PidGains& gains,
                         const PlantParams& params, const FsrConfig& phase_cfg, const SimConfig& config) {
  profile.validate();
  conv.validate();
  gains.validate();
  params.validate();
  phase_cfg.validate();
  if (config.n_cycles < 1) throw Error(ErrorCode::InvalidArgument, "n_cycles must be >= 1");
  if (!(config.stride_duration > 0.0) || config.stride_jitter < 0.0 || config.stride_jitter >= 1.0) {
    throw Error(ErrorCode::InvalidArgument, "stride duration must be positive and jitter in [0, 1)");
  }


  std::mt19937_64 gait_rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  std::mt19937_64 sensor_rng(config.seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);

  SimResult out;
  double t0 = 0.0;
  for (int i = 0; i < config.n_cycles; ++i) {
    out.cycle_starts.push_back(t0);
    t0 += config.stride_duration * (1.0 + config.stride_jitter * jitter(gait_rng));
  }
  const double total = t0;
  const StrideClock clock(out.cycle_starts, total);
  const double scale = config.anchor_scale;
  const AnchorMotion anchor = [&clock, scale](double t) {
    return -scale * synthetic_ankle_angle(clock.gc(t)) * std::numbers::pi / 180.0;
  };

  const double dt = 1.0 / params.control_rate;
  const auto ticks = static_cast<std::size_t>(std::floor(total * params.control_rate + 1e-9));
  for (auto* v : {&out.time, &out.fsr, &out.gc, &out.reference, &out.measured, &out.tension_true, &out.command}) {
    v->reserve(ticks);
  }

  PlantState plant = initial_plant_state(params, anchor);
  PidState pid;
  PhaseState phase;
  phase.default_stride = config.stride_duration;
  HeelStrikeDetector detector(phase_cfg);
  std::normal_distribution<double> fsr_noise(0.0, config.fsr_noise_sd > 0.0 ? config.fsr_noise_sd : 1.0);

  for (std::size_t k = 0; k < ticks; ++k) {
    const double t = static_cast<double>(k) * dt;
    double fsr = synthetic_heel_load(clock.gc(t));
    if (config.fsr_noise_sd > 0.0) fsr += fsr_noise(sensor_rng);
    const auto strike = detector.push(t, fsr);
    if (strike) out.detected_strikes.push_back(*strike);
    auto upd = update_phase(std::move(phase), t, strike.has_value());
    phase = std::move(upd.state);

    double ref;
    if (config.constant_reference) {
      ref = *config.constant_reference;
    } else {
      ref = std::max(params.pretension, reference_tension(profile, conv, upd.gc));
    }
    const double meas = plant.tension_measured;
    auto step = pid_step(gains, pid, ref, meas, dt);
    pid = step.state;

    out.time.push_back(t);
    out.fsr.push_back(fsr);
    out.gc.push_back(upd.gc);
    out.reference.push_back(ref);
    out.measured.push_back(meas);
    out.tension_true.push_back(plant.tension_true);
    out.command.push_back(step.command);

    plant = plant_step(params, plant, step.command, anchor, dt, sensor_rng);
  }
  out.motor_work = plant.motor_work;
  out.anchor_work = plant.anchor_work;

  const TrackingMetrics m = tracking_metrics(out);
  out.rms_error = m.rms_error;
  out.peak_error = m.peak_error;
  out.cycles = m.cycles;
  return out;
}

TrackingMetrics tracking_metrics(const SimResult& result) {
  const std::size_t n = result.time.size();
  if (n == 0 || result.reference.size() != n || result.measured.size() != n) {
    throw Error(ErrorCode::EmptyResult, "simulation result has no samples or mismatched series");
  }
  std::vector<double> starts = result.cycle_starts;
  if (starts.empty()) starts.push_back(result.time.front());

  TrackingMetrics m;
  std::vector<double> sq(starts.size(), 0.0), mean_t(starts.size(), 0.0);
  std::vector<std::size_t> count(starts.size(), 0);
  m.cycles.resize(starts.size());
  for (std::size_t c = 0; c < starts.size(); ++c) {
    m.cycles[c].index = static_cast<int>(c);
    m.cycles[c].start = starts[c];
    m.cycles[c].end = c + 1 < starts.size() ? starts[c + 1] : result.time.back();
  }

  const bool single = starts.size() == 1;
  double total_sq = 0.0;
  std::size_t total_n = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = std::upper_bound(starts.begin(), starts.end(), result.time[i]);
    const std::size_t c = it == starts.begin() ? 0 : static_cast<std::size_t>(it - starts.begin()) - 1;
    const double err = std::abs(result.measured[i] - result.reference[i]);
    CycleSummary& cs = m.cycles[c];
    sq[c] += err * err;
    ++count[c];
    cs.peak_error = std::max(cs.peak_error, err);
    cs.peak_reference = std::max(cs.peak_reference, result.reference[i]);
    cs.peak_measured = std::max(cs.peak_measured, result.measured[i]);
    if (!result.tension_true.empty()) mean_t[c] += result.tension_true[i];
    if (single || c >= 1) {
      total_sq += err * err;
      ++total_n;
      m.peak_error = std::max(m.peak_error, err);
    }
  }
  for (std::size_t c = 0; c < starts.size(); ++c) {
    if (count[c] == 0) continue;
    m.cycles[c].rms_error = std::sqrt(sq[c] / static_cast<double>(count[c]));
    m.cycles[c].mean_tension = mean_t[c] / static_cast<double>(count[c]);
  }
  if (total_n == 0) throw Error(ErrorCode::EmptyResult, "no samples in steady cycles");
  m.rms_error = std::sqrt(total_sq / static_cast<double>(total_n));
  return m;
}

}  // namespace exogait
