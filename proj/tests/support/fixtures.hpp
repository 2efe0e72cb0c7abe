#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "exogait/exogait.hpp"

namespace fixtures {

using exogait::Trial;

inline float f32(double v) { return static_cast<float>(v); }

// Values that survive a float32 round trip unchanged.
inline double float_exact(std::mt19937_64& rng, double lo, double hi) {
  return static_cast<double>(f32(std::uniform_real_distribution<double>(lo, hi)(rng)));
}

inline Trial random_trial(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> markers(0, 5), analogs(0, 4), ratio(1, 4), frames(2, 120), events(0, 8);
  const double rates[] = {50.0, 100.0, 120.0, 200.0, 250.0};
  Trial t;
  t.point_rate = rates[std::uniform_int_distribution<int>(0, 4)(rng)];
  int nm = markers(rng);
  int na = analogs(rng);
  if (nm == 0 && na == 0) nm = 1;
  const int nf = frames(rng);
  const int r = ratio(rng);
  t.analog_rate = na > 0 ? t.point_rate * r : t.point_rate;
  t.first_frame = std::uniform_int_distribution<int>(1, 500)(rng);
  t.last_frame = t.first_frame + nf - 1;
  std::bernoulli_distribution gap(0.1);
  for (int m = 0; m < nm; ++m) {
    exogait::MarkerTrajectory mt;
    mt.label = "M" + std::to_string(m) + (m % 2 ? "_ANK" : "_HEE");
    for (int f = 0; f < nf; ++f) {
      exogait::PointFrame pf;
      pf.valid = !gap(rng);
      if (pf.valid) {
        for (auto& c : pf.xyz) c = std::uniform_real_distribution<double>(-2000.0, 2000.0)(rng);
      }
      mt.frames.push_back(pf);
    }
    t.markers.push_back(mt);
  }
  for (int a = 0; a < na; ++a) {
    exogait::AnalogChannel ch;
    ch.label = "A" + std::to_string(a);
    ch.units = a % 2 ? "deg" : "N";
    ch.rate = t.analog_rate;
    for (int s = 0; s < nf * r; ++s) ch.samples.push_back(float_exact(rng, -1000.0, 1000.0));
    t.analogs.push_back(ch);
  }
  const int ne = events(rng);
  const char* contexts[] = {"Left", "Right"};
  const char* labels[] = {"Foot Strike", "Foot Off"};
  for (int e = 0; e < ne; ++e) {
    t.events.push_back({contexts[e % 2], labels[(e / 2) % 2], float_exact(rng, 0.0, 50.0)});
  }
  if (std::bernoulli_distribution(0.5)(rng)) {
    t.subject_meta["condition"] = "NoExo";
    t.subject_meta["subject"] = "S" + std::to_string(std::uniform_int_distribution<int>(1, 99)(rng));
  }
  return t;
}

// Payload equality: markers within `tol` mm on valid frames, everything else exact.
inline bool same_payload(const Trial& a, const Trial& b, double tol, std::string* why = nullptr) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (a.point_rate != b.point_rate) return fail("point_rate");
  if (a.first_frame != b.first_frame || a.last_frame != b.last_frame) return fail("frame range");
  if (a.markers.size() != b.markers.size()) return fail("marker count");
  for (std::size_t m = 0; m < a.markers.size(); ++m) {
    const auto& x = a.markers[m];
    const auto& y = b.markers[m];
    if (x.label != y.label || x.frames.size() != y.frames.size()) return fail("marker " + x.label);
    for (std::size_t f = 0; f < x.frames.size(); ++f) {
      if (x.frames[f].valid != y.frames[f].valid) return fail("validity " + x.label);
      if (!x.frames[f].valid) continue;
      for (int c = 0; c < 3; ++c) {
        if (std::abs(x.frames[f].xyz[c] - y.frames[f].xyz[c]) > tol) return fail("coordinate " + x.label);
      }
    }
  }
  if (a.analogs.size() != b.analogs.size()) return fail("analog count");
  if (!a.analogs.empty() && a.analog_rate != b.analog_rate) return fail("analog_rate");
  for (std::size_t c = 0; c < a.analogs.size(); ++c) {
    const auto& x = a.analogs[c];
    const auto& y = b.analogs[c];
    if (x.label != y.label || x.units != y.units || x.samples != y.samples) return fail("analog " + x.label);
  }
  if (a.events != b.events) return fail("events");
  if (a.subject_meta != b.subject_meta) return fail("metadata");
  return true;
}

// Stride-level two-condition study with random trial intercepts.
inline std::vector<exogait::StrideObservation> study(std::mt19937_64& rng, double diff, double sd_trial,
                                                     double sd_stride, int trials, int strides,
                                                     double base = 10.0) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<exogait::StrideObservation> obs;
  for (int c = 0; c < 2; ++c) {
    for (int j = 0; j < trials; ++j) {
      const double b = sd_trial * z(rng);
      const std::string id = (c ? "T1_" : "T0_") + std::to_string(j);
      for (int k = 0; k < strides; ++k) obs.push_back({base + c * diff + b + sd_stride * z(rng), c, id});
    }
  }
  return obs;
}

}  // namespace fixtures
