#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "exogait/exogait.hpp"

namespace py = pybind11;
using namespace exogait;

namespace {

std::vector<StrideObservation> observations(const std::vector<double>& values, const std::vector<int>& conditions,
                                            const std::vector<std::string>& trial_ids) {
  if (values.size() != conditions.size() || values.size() != trial_ids.size()) {
    throw Error(ErrorCode::InvalidArgument, "values, conditions and trial_ids differ in length");
  }
  std::vector<StrideObservation> obs;
  obs.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) obs.push_back({values[i], conditions[i], trial_ids[i]});
  return obs;
}

py::dict lme_dict(const LmeFit& f) {
  py::dict d;
  d["beta0"] = f.beta0;
  d["beta1"] = f.beta1;
  d["sigma_b2"] = f.sigma_b2;
  d["sigma_e2"] = f.sigma_e2;
  d["se_beta1"] = f.se_beta1;
  d["p_wald"] = f.p_wald;
  d["converged"] = f.converged;
  d["log_reml"] = f.log_reml;
  d["lambda"] = f.lambda;
  d["degenerate"] = f.degenerate;
  return d;
}

py::dict tost_dict(const TostResult& r) {
  py::dict d;
  d["diff"] = r.diff;
  d["se_welch"] = r.se_welch;
  d["df_welch"] = r.df_welch;
  d["t_lower"] = r.t_lower;
  d["t_upper"] = r.t_upper;
  d["p_lower"] = r.p_lower;
  d["p_upper"] = r.p_upper;
  d["equivalent"] = r.equivalent;
  d["bound"] = r.bound;
  d["alpha"] = r.alpha;
  d["degenerate_variance"] = r.degenerate_variance;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  static py::exception<Error> error(m, "ExogaitError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string msg = std::string(to_string(e.code())) + ": " + e.what();
      PyErr_SetString(error.ptr(), msg.c_str());
    }
  });

  py::enum_<Side>(m, "Side").value("Left", Side::Left).value("Right", Side::Right);
  py::enum_<EventKind>(m, "EventKind").value("FootStrike", EventKind::FootStrike).value("FootOff", EventKind::FootOff);

  py::class_<PointFrame>(m, "PointFrame")
      .def(py::init<>())
      .def_readwrite("xyz", &PointFrame::xyz)
      .def_readwrite("valid", &PointFrame::valid);
  py::class_<MarkerTrajectory>(m, "MarkerTrajectory")
      .def(py::init<>())
      .def_readwrite("label", &MarkerTrajectory::label)
      .def_readwrite("frames", &MarkerTrajectory::frames)
      .def("axis", &MarkerTrajectory::axis);
  py::class_<AnalogChannel>(m, "AnalogChannel")
      .def(py::init<>())
      .def_readwrite("label", &AnalogChannel::label)
      .def_readwrite("units", &AnalogChannel::units)
      .def_readwrite("samples", &AnalogChannel::samples)
      .def_readwrite("rate", &AnalogChannel::rate);
  py::class_<EventRecord>(m, "EventRecord")
      .def(py::init<>())
      .def(py::init([](std::string c, std::string l, double t) { return EventRecord{std::move(c), std::move(l), t}; }),
           py::arg("context"), py::arg("label"), py::arg("time"))
      .def_readwrite("context", &EventRecord::context)
      .def_readwrite("label", &EventRecord::label)
      .def_readwrite("time", &EventRecord::time);
  py::class_<Trial>(m, "Trial")
      .def(py::init<>())
      .def_readwrite("markers", &Trial::markers)
      .def_readwrite("analogs", &Trial::analogs)
      .def_readwrite("events", &Trial::events)
      .def_readwrite("point_rate", &Trial::point_rate)
      .def_readwrite("analog_rate", &Trial::analog_rate)
      .def_readwrite("first_frame", &Trial::first_frame)
      .def_readwrite("last_frame", &Trial::last_frame)
      .def_readwrite("subject_meta", &Trial::subject_meta)
      .def("frame_count", &Trial::frame_count);

  m.def("read_c3d", [](py::bytes data) {
    const std::string s = data;
    return read_c3d(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  });
  m.def("write_c3d", [](const Trial& t) {
    const auto b = write_c3d(t);
    return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
  });
  m.def("read_c3d_file", [](const std::string& path) { return read_c3d_file(path); });
  m.def("write_c3d_file", [](const Trial& t, const std::string& path) { write_c3d_file(t, path); });

  py::class_<TorqueProfile>(m, "TorqueProfile")
      .def(py::init([](double onset, double peak, double end, double torque) {
             TorqueProfile p{onset, peak, end, torque};
             p.validate();
             return p;
           }),
           py::arg("onset_gc") = 23.2, py::arg("peak_gc") = 50.4, py::arg("end_gc") = 62.7,
           py::arg("peak_torque") = 10.0)
      .def_readonly("onset_gc", &TorqueProfile::onset_gc)
      .def_readonly("peak_gc", &TorqueProfile::peak_gc)
      .def_readonly("end_gc", &TorqueProfile::end_gc)
      .def_readonly("peak_torque", &TorqueProfile::peak_torque);

  m.attr("DEFAULT_MOMENT_ARM") = kDefaultMomentArm;
  m.def("torque_at", &torque_at, py::arg("profile"), py::arg("gc"));
  m.def(
      "torque_to_tension",
      [](double torque, double arm) { return torque_to_tension(torque, TensionConversion{arm}); },
      py::arg("torque"), py::arg("moment_arm") = kDefaultMomentArm);
  m.def(
      "tension_to_torque",
      [](double tension, double arm) { return tension_to_torque(tension, TensionConversion{arm}); },
      py::arg("tension"), py::arg("moment_arm") = kDefaultMomentArm);
  m.def(
      "reference_tension",
      [](const TorqueProfile& p, double gc, double arm) { return reference_tension(p, TensionConversion{arm}, gc); },
      py::arg("profile"), py::arg("gc"), py::arg("moment_arm") = kDefaultMomentArm);

  m.def(
      "smooth_to_mse",
      [](const std::vector<double>& y, double rate, double target) {
        SmoothingSpec spec;
        spec.target_mse = target;
        const auto r = smooth_to_mse(y, rate, spec);
        py::dict d;
        d["smoothed"] = r.smoothed;
        d["achieved_mse"] = r.achieved_mse;
        d["met_target"] = r.met_target;
        d["penalty_weight"] = r.penalty_weight;
        return d;
      },
      py::arg("samples"), py::arg("rate"), py::arg("target_mse") = 10.0);
  m.def(
      "fill_gaps",
      [](const std::vector<double>& y, std::vector<bool> valid, int max_gap) {
        const auto filled = fill_gaps(y, valid, GapFillSpec{max_gap});
        return py::make_tuple(filled, valid);
      },
      py::arg("samples"), py::arg("valid"), py::arg("max_gap") = 10);

  m.def(
      "normalize_cycle",
      [](const std::vector<double>& y, double rate, double start, double end, double series_start) {
        SampledSeries s;
        s.samples = y;
        s.rate = rate;
        s.start_time = series_start;
        Stride st;
        st.start_time = start;
        st.end_time = end;
        const auto c = normalize_cycle(s, st);
        return std::vector<double>(c.samples.begin(), c.samples.end());
      },
      py::arg("samples"), py::arg("rate"), py::arg("start"), py::arg("end"), py::arg("series_start") = 0.0);
  m.def(
      "temporal_params",
      [](double strike, double off, double next_strike) {
        const std::vector<GaitEvent> ev = {{Side::Left, EventKind::FootStrike, strike},
                                           {Side::Left, EventKind::FootOff, off},
                                           {Side::Left, EventKind::FootStrike, next_strike}};
        const auto strides = segment_strides(ev, Side::Left);
        const auto tp = temporal_params(strides.at(0));
        py::dict d;
        d["cycle_duration"] = tp.cycle_duration;
        d["stance_duration"] = tp.stance_duration;
        d["swing_duration"] = tp.swing_duration;
        d["stance_pct"] = tp.stance_pct;
        d["swing_pct"] = tp.swing_pct;
        return d;
      },
      py::arg("strike"), py::arg("foot_off"), py::arg("next_strike"));

  m.def(
      "fit_lme",
      [](const std::vector<double>& v, const std::vector<int>& c, const std::vector<std::string>& ids) {
        return lme_dict(fit_lme(observations(v, c, ids)));
      },
      py::arg("values"), py::arg("conditions"), py::arg("trial_ids"));
  m.def(
      "tost_welch",
      [](const std::vector<double>& a, const std::vector<double>& b, double bound, double alpha) {
        return tost_dict(tost_welch(a, b, bound, alpha));
      },
      py::arg("a"), py::arg("b"), py::arg("bound"), py::arg("alpha") = 0.05);
  m.def("student_t_cdf", &student_t_cdf, py::arg("t"), py::arg("df"));

  m.def(
      "complexity_index",
      [](int limbs, int dof, int sensors, int actuators, const std::vector<double>& w) {
        if (w.size() != 4) throw Error(ErrorCode::InvalidArgument, "weights needs four values");
        ComplexityInputs in{limbs, dof, sensors, actuators, {w[0], w[1], w[2], w[3]}};
        return complexity_index(in);
      },
      py::arg("limbs"), py::arg("dof"), py::arg("sensors"), py::arg("actuators"), py::arg("weights"));

  m.def(
      "simulate",
      [](const TorqueProfile& profile, int cycles, std::uint64_t seed, double noise_sd, double jitter,
         double fsr_noise) {
        SimConfig cfg;
        cfg.n_cycles = cycles;
        cfg.seed = seed;
        cfg.stride_jitter = jitter;
        cfg.fsr_noise_sd = fsr_noise;
        PlantParams plant;
        plant.loadcell_noise_sd = noise_sd;
        const auto r = run_simulation(profile, TensionConversion{}, PidGains::tuned_defaults(), plant, FsrConfig{}, cfg);
        py::dict d;
        d["time"] = r.time;
        d["fsr"] = r.fsr;
        d["gc"] = r.gc;
        d["reference"] = r.reference;
        d["measured"] = r.measured;
        d["tension_true"] = r.tension_true;
        d["command"] = r.command;
        d["cycle_starts"] = r.cycle_starts;
        d["detected_strikes"] = r.detected_strikes;
        d["rms_error"] = r.rms_error;
        d["peak_error"] = r.peak_error;
        return d;
      },
      py::arg("profile") = TorqueProfile{}, py::arg("cycles") = 10, py::arg("seed") = 1, py::arg("noise_sd") = 1.0,
      py::arg("jitter") = 0.0, py::arg("fsr_noise") = 0.0);
}
