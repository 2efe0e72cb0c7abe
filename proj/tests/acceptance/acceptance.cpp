#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "exogait/exogait.hpp"
#include "fixtures.hpp"

using namespace exogait;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " FAILED:" << what << ";";
    }
  }
  void note(const std::string& text) { detail << " " << text << ";"; }
};

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

void trajectory(Outcome& o) {
  const TorqueProfile p{23.2, 50.4, 62.7, 10.0};
  const TensionConversion conv;
  o.require(std::abs(torque_at(p, 50.4) - 10.0) <= 1e-12, "torque_at(50.4) = " + fmt(torque_at(p, 50.4), 17));
  o.require(std::abs(torque_at(p, 23.2)) <= 1e-12, "torque_at(23.2) = " + fmt(torque_at(p, 23.2), 17));
  o.require(std::abs(torque_at(p, 62.7)) <= 1e-12, "torque_at(62.7) = " + fmt(torque_at(p, 62.7), 17));
  o.require(std::abs(torque_at(p, 36.8) - 5.0) <= 1e-9, "torque_at(36.8) = " + fmt(torque_at(p, 36.8), 17));
  const double ref = reference_tension(p, conv, 50.4);
  o.require(std::abs(ref - 166.71) <= 0.05, "reference_tension(50.4) = " + fmt(ref));
  o.note("peak tension " + fmt(ref) + " N");
}

void temporal(Outcome& o) {
  const std::vector<GaitEvent> events = {{Side::Left, EventKind::FootStrike, 0.0},
                                         {Side::Left, EventKind::FootOff, 0.559},
                                         {Side::Left, EventKind::FootStrike, 0.980}};
  const auto strides = segment_strides(events, Side::Left);
  o.require(strides.size() == 1, "stride count " + std::to_string(strides.size()));
  if (strides.size() != 1) return;
  const auto tp = temporal_params(strides[0]);
  o.require(std::abs(tp.stance_duration - 0.559) <= 1e-9, "stance " + fmt(tp.stance_duration, 17));
  o.require(std::abs(tp.swing_duration - 0.421) <= 1e-9, "swing " + fmt(tp.swing_duration, 17));
  // The tabulated 57.041 is 100 * 0.559 / 0.980 = 57.0408163... rounded to three decimals.
  o.require(std::abs(tp.stance_pct - 100.0 * 0.559 / 0.980) <= 1e-9, "stance_pct " + fmt(tp.stance_pct, 17));
  o.require(std::round(tp.stance_pct * 1000.0) / 1000.0 == 57.041, "stance_pct rounds to " + fmt(tp.stance_pct, 5));
  o.require(tp.stance_pct + tp.swing_pct == 100.0, "stance_pct + swing_pct = " + fmt(tp.stance_pct + tp.swing_pct, 17));
  o.note("stance_pct " + fmt(tp.stance_pct, 10) + " (57.041 at three decimals), sum exactly 100");
}

void normalization(Outcome& o) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_ramp = 0.0, worst_id = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const double rate = 50.0 + 450.0 * u(rng);
    const double a = -5.0 + 10.0 * u(rng);
    const double b = -3.0 + 6.0 * u(rng);
    SampledSeries ramp, ident;
    ramp.rate = ident.rate = rate;
    for (int i = 0; i < 800; ++i) {
      const double t = i / rate;
      ramp.samples.push_back(a + b * t);
      ident.samples.push_back(t);
    }
    const double start = ramp.end_time() * 0.3 * u(rng);
    const double end = start + (ramp.end_time() - start) * (0.2 + 0.8 * u(rng));
    Stride s;
    s.start_time = start;
    s.end_time = end;
    const auto nr = normalize_cycle(ramp, s, "ramp");
    const auto ni = normalize_cycle(ident, s, "time");
    o.require(nr.samples.size() == kCycleSamples && ni.samples.size() == kCycleSamples, "sample count");
    for (std::size_t k = 0; k < kCycleSamples; ++k) {
      const double tk = start + static_cast<double>(k) * (end - start) / 100.0;
      worst_ramp = std::max(worst_ramp, std::abs(nr.samples[k] - (a + b * tk)));
      worst_id = std::max(worst_id, std::abs(ni.samples[k] - tk));
    }
  }
  o.require(worst_ramp <= 1e-12, "ramp error " + fmt(worst_ramp));
  o.require(worst_id <= 1e-12, "identity error " + fmt(worst_id));
  o.note("101 samples; ramp max error " + fmt(worst_ramp, 3) + ", identity " + fmt(worst_id, 3));
}

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(std::exp(lo + (hi - lo) * i / (n - 1)));
  return g;
}

void lme(Outcome& o) {
  std::mt19937_64 rng(44);
  std::uniform_int_distribution<int> ntrials(2, 5), nstrides(3, 10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_gap = 0.0, worst_beta = 0.0;
  for (int rep = 0; rep < 25; ++rep) {
    std::normal_distribution<double> z(0.0, 1.0);
    const double sd_trial = 3.0 * u(rng), sd_stride = 0.2 + 2.0 * u(rng), diff = -3.0 + 6.0 * u(rng);
    std::vector<StrideObservation> obs;
    for (int c = 0; c < 2; ++c) {
      const int nt = ntrials(rng);
      for (int j = 0; j < nt; ++j) {
        const double b = sd_trial * z(rng);
        const int ns = nstrides(rng);
        const std::string id = "c" + std::to_string(c) + "t" + std::to_string(j);
        for (int k = 0; k < ns; ++k) obs.push_back({10.0 + c * diff + b + sd_stride * z(rng), c, id});
      }
    }
    const auto fit = fit_lme(obs);
    auto coarse = grid(-12.0, 12.0, 2401);
    coarse.insert(coarse.begin(), 0.0);
    const auto best = lme_oracle(obs, coarse);
    auto fine = std::vector<double>{0.0};
    if (best.lambda > 0.0) {
      const double c = std::log(best.lambda);
      fine = grid(c - 0.02, c + 0.02, 4001);
    } else {
      for (double l : grid(-30.0, std::log(coarse[2]), 4001)) fine.push_back(l);
    }
    const auto refined = lme_oracle(obs, fine);
    const auto& oracle = refined.log_reml >= best.log_reml ? refined : best;
    worst_gap = std::max(worst_gap, oracle.log_reml - fit.log_reml);
    worst_beta = std::max(worst_beta, std::abs(fit.beta1 - oracle.beta1));
  }
  o.require(worst_gap <= 1e-9, "REML shortfall " + fmt(worst_gap));
  o.require(worst_beta <= 1e-4, "beta1 gap " + fmt(worst_beta));
  o.note("max REML shortfall " + fmt(worst_gap, 3) + ", max |beta1 - oracle| " + fmt(worst_beta, 3));
}

void tost_fixture(Outcome& o) {
  const std::vector<double> a = {10.0, 10.2, 10.4}, b = {10.3, 10.5, 10.7};
  const auto r = tost_welch(a, b, 2.0);
  o.require(std::abs(r.diff + 0.3) <= 1e-12, "diff " + fmt(r.diff, 17));
  o.require(std::abs(r.se_welch - 0.16330) <= 1e-5, "se " + fmt(r.se_welch, 10));
  o.require(std::abs(r.df_welch - 4.0) <= 1e-9, "df " + fmt(r.df_welch, 17));
  o.require(r.equivalent, "not equivalent");
  o.note("diff " + fmt(r.diff) + ", se " + fmt(r.se_welch) + ", df " + fmt(r.df_welch) + ", p " +
         fmt(std::max(r.p_lower, r.p_upper), 3));
}

// Trial and stride deviations each carry half of the condition's stride-level variance.
double equivalence_rate(double diff, int replicates, std::uint64_t seed) {
  const double sd0 = 1.907, sd1 = 4.017;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  int equivalent = 0;
  for (int rep = 0; rep < replicates; ++rep) {
    std::vector<StrideObservation> obs;
    for (int c = 0; c < 2; ++c) {
      const double sd = (c ? sd1 : sd0) / std::sqrt(2.0);
      for (int j = 0; j < 3; ++j) {
        const double b = sd * z(rng);
        const std::string id = "c" + std::to_string(c) + "t" + std::to_string(j);
        for (int k = 0; k < 10; ++k) obs.push_back({10.0 + c * diff + b + sd * z(rng), c, id});
      }
    }
    const auto tm = trial_means(obs);
    if (tost_welch(tm.condition1, tm.condition0, 2.0).equivalent) ++equivalent;
  }
  return static_cast<double>(equivalent) / replicates;
}

void synthetic_study(Outcome& o) {
  const double near = equivalence_rate(1.24, 200, 1001);
  const double far = equivalence_rate(5.0, 200, 2002);
  o.require(near > 0.80, "equivalence rate at 1.24 deg = " + fmt(near, 3) + " (needs > 0.80)");
  o.require(far < 0.05, "equivalence rate at 5 deg = " + fmt(far, 3) + " (needs < 0.05)");
  o.note("equivalent at 1.24 deg " + fmt(100 * near, 3) + "%, at 5 deg " + fmt(100 * far, 3) + "%");
}

void smoothing(Outcome& o) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> y;
  for (int i = 0; i < 400; ++i) y.push_back(50.0 * std::sin(2.0 * M_PI * i / 100.0) + 4.0 * z(rng));
  const auto r = smooth_to_mse(y, 100.0, SmoothingSpec{});
  o.require(r.achieved_mse >= 9.5 && r.achieved_mse <= 10.5, "MSE " + fmt(r.achieved_mse));
  int violations = 0;
  for (int s = 0; s < 10; ++s) {
    std::uniform_int_distribution<int> len(20, 300);
    std::vector<double> x;
    const int n = len(rng);
    const double amp = 10.0 + 90.0 * std::abs(z(rng));
    for (int i = 0; i < n; ++i) x.push_back(amp * std::sin(0.05 * i + s) + 5.0 * z(rng));
    double prev = -1.0;
    for (int k = 0; k < 20; ++k) {
      const double mse = mean_squared_difference(x, smooth_fixed(x, std::pow(10.0, -4.0 + 0.6 * k)));
      if (mse < prev) ++violations;
      prev = mse;
    }
  }
  o.require(violations == 0, std::to_string(violations) + " monotonicity violations");
  o.note("MSE " + fmt(r.achieved_mse) + " for target 10; 10 series x 20 weights monotone");
}

void c3d(Outcome& o) {
  std::mt19937_64 rng(8);
  int bad = 0;
  std::string why;
  for (int i = 0; i < 50; ++i) {
    const Trial t = fixtures::random_trial(rng);
    if (!fixtures::same_payload(t, read_c3d(write_c3d(t)), 1e-4, &why)) ++bad;
  }
  o.require(bad == 0, std::to_string(bad) + " round trips differ (" + why + ")");
  auto bytes = write_c3d(fixtures::random_trial(rng));
  auto magic = bytes;
  magic[1] = 0x00;
  o.require(code_of([&] { read_c3d(magic); }) == ErrorCode::MalformedHeader, "bad magic not MalformedHeader");
  int wrong = 0;
  for (std::size_t n : {std::size_t{0}, std::size_t{10}, std::size_t{511}, std::size_t{600}, bytes.size() - 512}) {
    const std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n));
    if (code_of([&] { read_c3d(cut); }) != ErrorCode::TruncatedData) ++wrong;
  }
  o.require(wrong == 0, std::to_string(wrong) + " truncations not TruncatedData");
  o.note("50 round trips; malformed magic and 5 truncations rejected");
}

SimResult simulate(const TorqueProfile& profile, std::uint64_t seed) {
  SimConfig cfg;
  cfg.n_cycles = 10;
  cfg.stride_duration = 0.980;
  cfg.seed = seed;
  return run_simulation(profile, TensionConversion{}, PidGains::tuned_defaults(), PlantParams{}, FsrConfig{}, cfg);
}

void closed_loop(Outcome& o) {
  const TorqueProfile profile{23.2, 50.4, 62.7, 10.0};
  const auto a = simulate(profile, 11);
  const double limit = 0.05 * 166.71;
  o.require(a.rms_error < limit, "steady RMS " + fmt(a.rms_error) + " N (needs < " + fmt(limit) + ")");
  TorqueProfile zero = profile;
  zero.peak_torque = 0.0;
  const auto z = simulate(zero, 11);
  double mean = 0.0;
  for (double t : z.tension_true) mean += t;
  mean /= static_cast<double>(z.tension_true.size());
  const double cap = PlantParams{}.pretension + 1.0;
  o.require(mean <= cap, "zero-torque mean " + fmt(mean) + " N");
  const auto b = simulate(profile, 11);
  const bool same = a.time == b.time && a.measured == b.measured && a.tension_true == b.tension_true &&
                    a.command == b.command && a.gc == b.gc && a.reference == b.reference;
  o.require(same, "traces differ for equal seeds");
  o.note("steady RMS " + fmt(a.rms_error, 4) + " N, peak " + fmt(a.peak_error, 4) + " N; zero-torque mean " +
         fmt(mean, 4) + " N; repeat run identical");
}

void phase(Outcome& o) {
  const double rate = 500.0, nominal = 0.980;
  std::mt19937_64 gait(12), sensor(13);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<double> strikes;
  double t0 = 0.0;
  for (int i = 0; i < 100; ++i) {
    strikes.push_back(t0);
    t0 += nominal * (1.0 + jitter(gait));
  }
  const double total = t0;
  auto true_gc = [&](double t) {
    const auto it = std::upper_bound(strikes.begin(), strikes.end(), t) - 1;
    const double end = it + 1 == strikes.end() ? total : *(it + 1);
    return 100.0 * (t - *it) / (end - *it);
  };
  HeelStrikeDetector det;
  PhaseState st;
  st.default_stride = nominal;
  std::vector<double> detected;
  int out_of_range = 0, nonzero_at_strike = 0;
  const auto n = static_cast<std::size_t>(std::floor(total * rate));
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / rate;
    const auto hit = det.push(t, synthetic_heel_load(true_gc(t)) + noise(sensor));
    if (hit) detected.push_back(*hit);
    auto u = update_phase(std::move(st), t, hit.has_value());
    st = std::move(u.state);
    if (!(u.gc >= 0.0 && u.gc <= 100.0)) ++out_of_range;
    if (hit && u.gc != 0.0) ++nonzero_at_strike;
  }
  // A strike is recovered by exactly one detection within 5% of a nominal stride after it.
  const double window = 0.05 * nominal;
  int recovered = 0, false_pos = 0;
  for (double d : detected) {
    const auto it = std::upper_bound(strikes.begin(), strikes.end(), d);
    const bool matched = it != strikes.begin() && d - *(it - 1) < window;
    if (!matched) ++false_pos;
  }
  for (double s : strikes) {
    const auto c = std::count_if(detected.begin(), detected.end(), [&](double d) { return d >= s && d - s < window; });
    if (c == 1) ++recovered;
  }
  o.require(out_of_range == 0, std::to_string(out_of_range) + " GC samples outside [0, 100]");
  o.require(nonzero_at_strike == 0, std::to_string(nonzero_at_strike) + " strikes with GC != 0");
  o.require(recovered == 100, std::to_string(recovered) + "/100 strikes recovered");
  o.require(false_pos == 0, std::to_string(false_pos) + " false positives");
  o.note(std::to_string(recovered) + "/100 strikes recovered, " + std::to_string(false_pos) + " false positives");
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<void(Outcome&)> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "trajectory fixture", 1.0, trajectory},
      {2, "temporal arithmetic", 1.0, temporal},
      {3, "normalization", 1.0, normalization},
      {4, "LME oracle equivalence", 10.0, lme},
      {5, "TOST hand fixture", 1.0, tost_fixture},
      {6, "synthetic equivalence study", 60.0, synthetic_study},
      {7, "smoothing", 10.0, smoothing},
      {8, "C3D round trip", 10.0, c3d},
      {9, "closed-loop simulation", 30.0, closed_loop},
      {10, "phase estimation", 10.0, phase},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(secs < c.limit_s, "runtime " + fmt(secs, 3) + " s over " + fmt(c.limit_s) + " s");
    if (!o.pass) ++failed;
    std::printf("%s %2d %s (%.3f s):%s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.str().c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
