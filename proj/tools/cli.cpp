#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "exogait/exogait.hpp"

namespace exogait::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reads a JSON object into CLI11 config items. Nested objects name subcommands,
// arrays become repeated values.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    Json j;
    try {
      j = Json::parse(input);
    } catch (const Json::exception& e) {
      throw CLI::ConversionError("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_float()) return format_number(v.get<double>());
    return v.dump();
  }

  static void collect(const Json& obj, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& out) {
    for (const auto& [key, value] : obj.items()) {
      if (value.is_object()) {
        auto p = parents;
        p.push_back(key);
        collect(value, p, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      out.push_back(std::move(item));
    }
  }
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
  return out;
}

std::vector<double> parse_list(const std::string& text, std::size_t n, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    double v = 0.0;
    const char* b = cell.data();
    const char* e = b + cell.size();
    while (b < e && *b == ' ') ++b;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) throw UsageError(what + " expects " + std::to_string(n) + " numbers, got '" + text + "'");
    out.push_back(v);
  }
  if (out.size() != n) throw UsageError(what + " expects " + std::to_string(n) + " comma-separated numbers");
  return out;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

std::string cell(std::optional<double> v) { return v ? format_number(*v) : std::string(); }

Trial load_trial(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".c3d") return read_c3d_file(path);
  return read_csv_trial(read_text(path));
}

// ---------------------------------------------------------------------------
// inspect

struct InspectArgs {
  std::string input;
  bool json = false;
};

int cmd_inspect(const InspectArgs& a, std::ostream& out) {
  const Trial t = load_trial(a.input);
  if (a.json) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["file"] = fs::path(a.input).filename().string();
    j["point_rate"] = t.point_rate;
    j["analog_rate"] = t.analog_rate;
    j["first_frame"] = t.first_frame;
    j["last_frame"] = t.last_frame;
    j["markers"] = Json::array();
    for (const auto& m : t.markers) j["markers"].push_back({{"label", m.label}, {"valid_frames", m.valid_count()}});
    j["analogs"] = Json::array();
    for (const auto& c : t.analogs) {
      j["analogs"].push_back({{"label", c.label}, {"units", c.units}, {"samples", c.samples.size()}});
    }
    j["events"] = Json::array();
    for (const auto& e : t.events) j["events"].push_back({{"context", e.context}, {"label", e.label}, {"time", e.time}});
    j["metadata"] = Json::object();
    for (const auto& [k, v] : t.subject_meta) j["metadata"][k] = v;
    out << j.dump(2) << '\n';
    return kExitOk;
  }
  out << "file: " << fs::path(a.input).filename().string() << '\n';
  out << "frames: " << t.first_frame << ".." << t.last_frame << " (" << t.frame_count() << ")\n";
  out << "point rate: " << format_number(t.point_rate) << " Hz\n";
  out << "analog rate: " << format_number(t.analog_rate) << " Hz\n";
  out << "markers: " << t.markers.size() << '\n';
  for (const auto& m : t.markers) out << "  " << m.label << " " << m.valid_count() << "/" << m.frames.size() << " valid\n";
  out << "analogs: " << t.analogs.size() << '\n';
  for (const auto& c : t.analogs) {
    out << "  " << c.label << (c.units.empty() ? "" : " [" + c.units + "]") << " " << c.samples.size() << " samples\n";
  }
  out << "events: " << t.events.size() << '\n';
  for (const auto& e : t.events) out << "  " << format_number(e.time) << " " << e.context << " " << e.label << '\n';
  if (!t.subject_meta.empty()) {
    out << "metadata:\n";
    for (const auto& [k, v] : t.subject_meta) out << "  " << k << " = " << v << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
  std::vector<std::string> inputs;
  std::vector<std::string> events;
  std::string condition;
  std::string side = "both";
  std::string angle;
  std::string moment;
  std::string source = "analog";
  double mse = 10.0;
  int max_gap = 10;
  std::string out_strides;
  std::string out_ensemble;
  std::string qc;
  std::string write_processed;
};

const std::vector<std::string> kStrideColumns = {
    "trial_id",      "condition",       "side",          "stride_index",      "start_time",
    "end_time",      "cycle_duration",  "stance_duration", "swing_duration",  "stance_pct",
    "swing_pct",     "rom",             "peak_dorsiflexion", "peak_plantarflexion", "peak_plantarflexion_moment"};

std::string side_channel(const std::string& pattern, Side side) {
  std::string s = pattern;
  const std::string code = side == Side::Left ? "L" : "R";
  for (std::size_t p = s.find("{S}"); p != std::string::npos; p = s.find("{S}", p + code.size())) {
    s.replace(p, 3, code);
  }
  return s;
}

// Builds the series for "<label>" (analog) or "<marker>.<x|y|z>" (point).
SampledSeries channel_series(const Trial& t, const std::string& name, const std::string& source) {
  SampledSeries s;
  s.start_time = t.start_time();
  if (source == "point") {
    const auto dot = name.rfind('.');
    if (dot == std::string::npos || dot + 2 != name.size() || name[dot + 1] < 'x' || name[dot + 1] > 'z') {
      throw UsageError("point channel must be '<marker>.x|y|z', got '" + name + "'");
    }
    const MarkerTrajectory* m = t.find_marker(name.substr(0, dot));
    if (m == nullptr) throw Error(ErrorCode::InvalidArgument, "marker '" + name.substr(0, dot) + "' not found");
    s.samples = m->axis(name[dot + 1] - 'x');
    s.rate = t.point_rate;
    s.valid.resize(m->frames.size());
    for (std::size_t i = 0; i < m->frames.size(); ++i) s.valid[i] = m->frames[i].valid;
    return s;
  }
  const AnalogChannel* c = t.find_analog(name);
  if (c == nullptr) throw Error(ErrorCode::InvalidArgument, "analog channel '" + name + "' not found");
  s.samples = c->samples;
  s.rate = c->rate > 0.0 ? c->rate : t.analog_rate;
  s.valid.resize(s.samples.size());
  for (std::size_t i = 0; i < s.samples.size(); ++i) s.valid[i] = std::isfinite(s.samples[i]);
  return s;
}

void fill_series(SampledSeries& s, const GapFillSpec& spec) {
  if (std::all_of(s.valid.begin(), s.valid.end(), [](bool v) { return v; })) return;
  if (std::count(s.valid.begin(), s.valid.end(), true) < 4) return;
  s.samples = fill_gaps(s.samples, s.valid, spec);
}

struct GroupKey {
  std::string condition;
  Side side;
  std::string variable;
  auto operator<=>(const GroupKey&) const = default;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  if (!a.events.empty() && a.events.size() != a.inputs.size()) {
    throw UsageError("--events must be given once per --input (" + std::to_string(a.inputs.size()) + ")");
  }
  std::vector<Side> sides;
  if (a.side == "left" || a.side == "both") sides.push_back(Side::Left);
  if (a.side == "right" || a.side == "both") sides.push_back(Side::Right);

  SmoothingSpec smooth;
  smooth.target_mse = a.mse;
  GapFillSpec gap;
  gap.max_gap = a.max_gap;
  try {
    smooth.validate();
    gap.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  std::ostringstream rows;
  for (std::size_t c = 0; c < kStrideColumns.size(); ++c) rows << (c ? "," : "") << kStrideColumns[c];
  rows << '\n';
  std::map<GroupKey, std::vector<NormalizedCycle>> groups;
  Json qc = Json::array();
  std::size_t total_rows = 0;

  for (std::size_t i = 0; i < a.inputs.size(); ++i) {
    const fs::path path = a.inputs[i];
    Trial trial = load_trial(path);
    if (!a.events.empty()) trial.events = read_events_csv(read_text(a.events[i]));
    const std::vector<GaitEvent> events = extract_events(trial);

    std::string condition = a.condition;
    if (condition.empty()) {
      auto it = trial.subject_meta.find("condition");
      if (it == trial.subject_meta.end()) {
        throw UsageError("no --condition given and '" + path.string() + "' carries no condition metadata");
      }
      condition = it->second;
    }
    std::string trial_id = path.stem().string();
    if (auto it = trial.subject_meta.find("trial_id"); it != trial.subject_meta.end()) trial_id = it->second;
    for (const std::string* s : {&condition, &trial_id}) {
      if (s->find_first_of(",\"\n") != std::string::npos) {
        throw Error(ErrorCode::InvalidArgument, "trial id and condition must not contain commas or quotes");
      }
    }

    Json tq;
    tq["trial_id"] = trial_id;
    tq["condition"] = condition;
    if (a.source == "point") {
      Json sm = Json::array();
      for (auto& m : trial.markers) {
        if (m.valid_count() >= 4) m = fill_gaps(m, gap);
        MarkerSmoothingReport rep;
        m = smooth_marker(m, trial.point_rate, smooth, &rep);
        sm.push_back({{"marker", rep.label},
                      {"achieved_mse", rep.achieved_mse},
                      {"met_target", rep.met_target},
                      {"runs_smoothed", rep.runs_smoothed},
                      {"runs_skipped", rep.runs_skipped}});
      }
      tq["smoothing"] = sm;
    }
    if (!a.write_processed.empty()) {
      fs::create_directories(a.write_processed);
      write_c3d_file(trial, fs::path(a.write_processed) / (path.stem().string() + ".processed.c3d"));
    }

    Json side_qc = Json::array();
    for (Side side : sides) {
      std::optional<SampledSeries> angle, moment;
      std::string angle_name, moment_name;
      if (!a.angle.empty()) {
        angle_name = side_channel(a.angle, side);
        angle = channel_series(trial, angle_name, a.source);
        fill_series(*angle, gap);
      }
      if (!a.moment.empty()) {
        moment_name = side_channel(a.moment, side);
        moment = channel_series(trial, moment_name, a.source);
        fill_series(*moment, gap);
      }
      const auto strides = segment_strides(events, side);
      std::size_t used = 0, gaps = 0, outside = 0, flagged = 0;
      for (std::size_t k = 0; k < strides.size(); ++k) {
        const Stride& st = strides[k];
        std::optional<NormalizedCycle> ang, mom;
        try {
          if (angle) ang = normalize_cycle(*angle, st, "angle", "deg");
          if (moment) mom = normalize_cycle(*moment, st, "moment", "Nm");
        } catch (const Error& e) {
          if (e.code() == ErrorCode::GapInStride) {
            ++gaps;
            continue;
          }
          if (e.code() == ErrorCode::StrideOutsideSeries) {
            ++outside;
            continue;
          }
          throw;
        }
        ++used;
        if (st.flagged()) ++flagged;
        std::optional<TemporalFeatures> tf;
        if (!st.flagged()) tf = temporal_params(st);
        std::optional<CycleFeatures> cf;
        if (ang) cf = cycle_features(*ang, mom ? &*mom : nullptr);
        rows << trial_id << ',' << condition << ',' << to_string(side) << ',' << k << ','
             << format_number(st.start_time) << ',' << format_number(st.end_time) << ','
             << format_number(st.end_time - st.start_time) << ','
             << cell(tf ? std::optional(tf->stance_duration) : std::nullopt) << ','
             << cell(tf ? std::optional(tf->swing_duration) : std::nullopt) << ','
             << cell(tf ? std::optional(tf->stance_pct) : std::nullopt) << ','
             << cell(tf ? std::optional(tf->swing_pct) : std::nullopt) << ','
             << cell(cf ? std::optional(cf->rom) : std::nullopt) << ','
             << cell(cf ? std::optional(cf->peak_dorsiflexion) : std::nullopt) << ','
             << cell(cf ? std::optional(cf->peak_plantarflexion) : std::nullopt) << ','
             << cell(cf ? cf->peak_plantarflexion_moment : std::nullopt) << '\n';
        ++total_rows;
        if (ang) groups[{condition, side, "angle"}].push_back(*ang);
        if (mom) groups[{condition, side, "moment"}].push_back(*mom);
      }
      side_qc.push_back({{"side", to_string(side)},
                         {"angle_channel", angle_name},
                         {"moment_channel", moment_name},
                         {"strides", strides.size()},
                         {"used", used},
                         {"excluded_gap", gaps},
                         {"excluded_outside_data", outside},
                         {"flagged_foot_off", flagged}});
    }
    tq["sides"] = side_qc;
    qc.push_back(tq);
  }

  if (!a.out_strides.empty()) {
    auto f = open_out(a.out_strides);
    f << rows.str();
  } else {
    out << rows.str();
  }

  if (!a.out_ensemble.empty()) {
    std::vector<std::pair<std::string, Ensemble>> cols;
    for (const auto& [key, cycles] : groups) {
      cols.emplace_back(key.condition + "." + std::string(to_string(key.side)) + "." + key.variable, ensemble(cycles));
    }
    auto f = open_out(a.out_ensemble);
    f << "gc";
    for (const auto& [name, e] : cols) f << ',' << name << ".mean," << name << ".sd";
    f << '\n';
    for (std::size_t k = 0; k < kCycleSamples; ++k) {
      f << k;
      for (const auto& [name, e] : cols) f << ',' << format_number(e.mean.samples[k]) << ',' << format_number(e.sd.samples[k]);
      f << '\n';
    }
  }

  if (!a.qc.empty()) {
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["stride_rows"] = total_rows;
    doc["trials"] = qc;
    auto f = open_out(a.qc);
    f << doc.dump(2) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// compare

struct CompareArgs {
  std::vector<std::string> strides;
  std::string conditions = "NoExo,ExoOff";
  std::vector<std::string> features;
  std::vector<std::string> bounds;
  std::string side = "both";
  double alpha = 0.05;
  double angle_bound = 2.0;
  double duration_bound = 0.05;
  std::string out;
  std::string format = "json";
};

const std::set<std::string> kAngleFeatures = {"rom", "peak_dorsiflexion", "peak_plantarflexion"};
const std::set<std::string> kDurationFeatures = {"cycle_duration", "stance_duration", "swing_duration"};

struct StrideTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

StrideTable read_stride_csv(const std::string& text) {
  StrideTable t;
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::string c;
    std::stringstream ss(l);
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (!l.empty() && l.back() == ',') cells.emplace_back();
    return cells;
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (t.header.empty()) {
      t.header = split(line);
      continue;
    }
    auto cells = split(line);
    if (cells.size() != t.header.size()) throw Error(ErrorCode::RaggedRows, "stride CSV row has the wrong number of cells");
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw Error(ErrorCode::BadHeaderRow, "stride CSV is empty");
  for (const char* need : {"trial_id", "condition", "side"}) {
    if (std::find(t.header.begin(), t.header.end(), need) == t.header.end()) {
      throw Error(ErrorCode::BadHeaderRow, std::string("stride CSV lacks column '") + need + "'");
    }
  }
  return t;
}

Json lme_json(const LmeFit& f) {
  return {{"beta0", f.beta0},       {"beta1", f.beta1},         {"se_beta1", f.se_beta1},
          {"p_wald", f.p_wald},     {"sigma_b2", f.sigma_b2},   {"sigma_e2", f.sigma_e2},
          {"log_reml", f.log_reml}, {"converged", f.converged}, {"degenerate", f.degenerate}};
}

Json tost_json(const TostResult& r) {
  return {{"diff", r.diff},       {"se_welch", r.se_welch}, {"df_welch", r.df_welch},     {"t_lower", r.t_lower},
          {"t_upper", r.t_upper}, {"p_lower", r.p_lower},   {"p_upper", r.p_upper},       {"bound", r.bound},
          {"alpha", r.alpha},     {"equivalent", r.equivalent}};
}

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  std::vector<std::string> conds;
  {
    std::stringstream ss(a.conditions);
    std::string c;
    while (std::getline(ss, c, ',')) conds.push_back(c);
  }
  if (conds.size() != 2 || conds[0].empty() || conds[1].empty() || conds[0] == conds[1]) {
    throw UsageError("--conditions needs two distinct labels, reference first");
  }
  StatConfig cfg{a.alpha, a.angle_bound, a.duration_bound};
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  std::map<std::string, double> explicit_bounds;
  for (const auto& b : a.bounds) {
    const auto eq = b.find('=');
    if (eq == std::string::npos) throw UsageError("--bound expects feature=value, got '" + b + "'");
    const auto v = parse_list(b.substr(eq + 1), 1, "--bound")[0];
    if (!(v > 0.0)) throw UsageError("equivalence bounds must be positive");
    explicit_bounds[b.substr(0, eq)] = v;
  }

  // Merge all tables; the column set of the first file decides the defaults.
  std::vector<std::string> header;
  std::vector<std::map<std::string, std::string>> records;
  for (const auto& path : a.strides) {
    const StrideTable t = read_stride_csv(read_text(path));
    if (header.empty()) header = t.header;
    for (const auto& row : t.rows) {
      std::map<std::string, std::string> rec;
      for (std::size_t c = 0; c < t.header.size(); ++c) rec[t.header[c]] = row[c];
      records.push_back(std::move(rec));
    }
  }

  const std::set<std::string> meta = {"trial_id", "condition", "side", "stride_index", "start_time", "end_time"};
  const bool requested = !a.features.empty();
  std::vector<std::string> features = a.features;
  if (!requested) {
    for (const auto& h : header) {
      if (meta.count(h)) continue;
      const bool any = std::any_of(records.begin(), records.end(), [&](const auto& r) {
        auto it = r.find(h);
        return it != r.end() && !it->second.empty();
      });
      if (any) features.push_back(h);
    }
  }

  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["conditions"] = conds;
  doc["alpha"] = cfg.alpha;
  doc["side"] = a.side;
  doc["features"] = Json::array();
  for (const auto& feature : features) {
    std::optional<double> bound;
    if (auto it = explicit_bounds.find(feature); it != explicit_bounds.end()) {
      bound = it->second;
    } else if (kAngleFeatures.count(feature)) {
      bound = cfg.angle_bound;
    } else if (kDurationFeatures.count(feature)) {
      bound = cfg.duration_bound;
    } else if (requested) {
      throw UsageError("feature '" + feature + "' has no default equivalence bound; pass --bound " + feature + "=<value>");
    }

    std::vector<StrideObservation> obs;
    std::size_t n0 = 0, n1 = 0;
    for (const auto& r : records) {
      auto v = r.find(feature);
      if (v == r.end()) {
        if (requested) throw UsageError("feature '" + feature + "' is not a stride CSV column");
        continue;
      }
      if (v->second.empty()) continue;
      if (a.side != "both" && r.at("side") != (a.side == "left" ? "Left" : "Right")) continue;
      const std::string& cond = r.at("condition");
      int c = -1;
      if (cond == conds[0]) c = 0;
      if (cond == conds[1]) c = 1;
      if (c < 0) continue;
      double x = 0.0;
      auto [p, ec] = std::from_chars(v->second.data(), v->second.data() + v->second.size(), x);
      if (ec != std::errc() || p != v->second.data() + v->second.size()) {
        throw Error(ErrorCode::NonNumericCell, "non-numeric '" + feature + "' value '" + v->second + "'");
      }
      obs.push_back({x, c, cond + "/" + r.at("trial_id")});
      (c == 0 ? n0 : n1)++;
    }

    Json fj;
    fj["feature"] = feature;
    fj["n_strides"] = {n0, n1};
    const LmeFit fit = fit_lme(obs);
    const TrialMeans tm = trial_means(obs);
    fj["n_trials"] = {tm.condition0.size(), tm.condition1.size()};
    fj["lme"] = lme_json(fit);
    if (bound) {
      fj["tost"] = tost_json(tost_welch(tm.condition1, tm.condition0, *bound, cfg.alpha));
    } else {
      fj["tost"] = nullptr;
    }
    doc["features"].push_back(fj);
  }

  if (!a.out.empty()) {
    auto f = open_out(a.out);
    f << doc.dump(2) << '\n';
  }
  if (a.format == "table") {
    out << "feature                      beta1      p_wald     diff       p_lower    p_upper    equivalent\n";
    for (const auto& f : doc["features"]) {
      std::string name = f["feature"].get<std::string>();
      name.resize(std::max<std::size_t>(name.size(), 28), ' ');
      auto num = [](double v) {
        std::string s = format_number(v);
        s.resize(std::max<std::size_t>(s.size(), 10), ' ');
        return s;
      };
      out << name << ' ' << num(f["lme"]["beta1"].get<double>()) << ' ' << num(f["lme"]["p_wald"].get<double>()) << ' ';
      if (f["tost"].is_null()) {
        out << "-          -          -          -\n";
      } else {
        out << num(f["tost"]["diff"].get<double>()) << ' ' << num(f["tost"]["p_lower"].get<double>()) << ' '
            << num(f["tost"]["p_upper"].get<double>()) << ' ' << (f["tost"]["equivalent"].get<bool>() ? "yes" : "no")
            << '\n';
      }
    }
  } else if (a.out.empty()) {
    out << doc.dump(2) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  int cycles = 10;
  std::uint64_t seed = 1;
  std::string gains;
  std::string profile;
  std::string trace;
  double noise = 1.0;
  double fsr_noise = 0.0;
  double stride = 0.980;
  double jitter = 0.0;
  double anchor_scale = kDefaultMomentArm;
  std::optional<double> constant_reference;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  PidGains gains = PidGains::tuned_defaults();
  if (!a.gains.empty()) {
    const auto g = parse_list(a.gains, 4, "--gains");
    gains.kp = g[0];
    gains.ki = g[1];
    gains.kd = g[2];
    gains.ff_gain = g[3];
  }
  TorqueProfile profile;
  if (!a.profile.empty()) {
    const auto p = parse_list(a.profile, 4, "--profile");
    profile = {p[0], p[1], p[2], p[3]};
  }
  PlantParams plant;
  plant.loadcell_noise_sd = a.noise;
  SimConfig cfg;
  cfg.n_cycles = a.cycles;
  cfg.seed = a.seed;
  cfg.stride_duration = a.stride;
  cfg.stride_jitter = a.jitter;
  cfg.anchor_scale = a.anchor_scale;
  cfg.fsr_noise_sd = a.fsr_noise;
  cfg.constant_reference = a.constant_reference;
  try {
    gains.validate();
    profile.validate();
    plant.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  const SimResult r = run_simulation(profile, TensionConversion{}, gains, plant, FsrConfig{}, cfg);

  if (!a.trace.empty()) {
    auto f = open_out(a.trace);
    f << "t,fsr,gc,reference,measured,tension_true,command\n";
    for (std::size_t i = 0; i < r.time.size(); ++i) {
      f << format_number(r.time[i]) << ',' << format_number(r.fsr[i]) << ',' << format_number(r.gc[i]) << ','
        << format_number(r.reference[i]) << ',' << format_number(r.measured[i]) << ','
        << format_number(r.tension_true[i]) << ',' << format_number(r.command[i]) << '\n';
    }
  }

  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["profile"] = {{"onset_gc", profile.onset_gc},
                    {"peak_gc", profile.peak_gc},
                    {"end_gc", profile.end_gc},
                    {"peak_torque", profile.peak_torque}};
  doc["gains"] = {{"kp", gains.kp}, {"ki", gains.ki}, {"kd", gains.kd}, {"ff", gains.ff_gain}};
  doc["cycles"] = a.cycles;
  doc["seed"] = a.seed;
  doc["rms_error"] = r.rms_error;
  doc["peak_error"] = r.peak_error;
  doc["motor_work"] = r.motor_work;
  doc["anchor_work"] = r.anchor_work;
  doc["heel_strikes"] = {{"true", r.cycle_starts.size()}, {"detected", r.detected_strikes.size()}};
  doc["per_cycle"] = Json::array();
  for (const auto& c : r.cycles) {
    doc["per_cycle"].push_back({{"index", c.index},
                                {"start", c.start},
                                {"end", c.end},
                                {"rms_error", c.rms_error},
                                {"peak_error", c.peak_error},
                                {"mean_tension", c.mean_tension},
                                {"peak_reference", c.peak_reference},
                                {"peak_measured", c.peak_measured}});
  }
  if (!a.out.empty()) {
    auto f = open_out(a.out);
    f << doc.dump(2) << '\n';
  }
  out << doc.dump(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// complexity

struct ComplexityArgs {
  int limbs = 0;
  int dof = 0;
  int sensors = 0;
  int actuators = 0;
  std::string weights;
};

int cmd_complexity(const ComplexityArgs& a, std::ostream& out) {
  const auto w = parse_list(a.weights, 4, "--weights");
  ComplexityInputs in{a.limbs, a.dof, a.sensors, a.actuators, {w[0], w[1], w[2], w[3]}};
  if (in.limbs < 0 || in.dof < 0 || in.sensors < 0 || in.actuators < 0) throw UsageError("counts must be >= 0");
  if (std::any_of(w.begin(), w.end(), [](double x) { return !(x >= 0.0); })) throw UsageError("weights must be >= 0");
  out << format_number(complexity_index(in)) << '\n';
  return kExitOk;
}

void diagnose(std::ostream& err, std::string_view code, const std::string& message) {
  err << "exogait: error[" << code << "]: " << one_line(message) << '\n';
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  std::string s(buf, end);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gait analysis and ankle-exoskeleton tension-control toolkit", "exogait"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file mirroring the command-line flags (flags win)");
  app.require_subcommand(1);
  app.set_version_flag("--version", "exogait 0.1.0");

  InspectArgs ia;
  auto* inspect = app.add_subcommand("inspect", "Summarize a C3D or CSV trial");
  inspect->add_option("--input,input", ia.input, "Trial file (.c3d or .csv)")->required()->check(CLI::ExistingFile);
  inspect->add_flag("--json", ia.json, "Print JSON instead of text");

  AnalyzeArgs aa;
  auto* analyze = app.add_subcommand("analyze", "Gap-fill, smooth, segment and extract stride features");
  analyze->add_option("--input", aa.inputs, "Trial file, repeatable")->required()->check(CLI::ExistingFile);
  analyze->add_option("--events", aa.events, "Event CSV (context,label,time), one per --input")->check(CLI::ExistingFile);
  analyze->add_option("--condition", aa.condition, "Condition label for every input (default: trial metadata)");
  analyze->add_option("--side", aa.side, "left, right or both")->check(CLI::IsMember({"left", "right", "both"}));
  analyze->add_option("--angle", aa.angle, "Ankle angle channel; {S} expands to L or R");
  analyze->add_option("--moment", aa.moment, "Ankle moment channel; {S} expands to L or R");
  analyze->add_option("--source", aa.source, "Channel source: analog or point (<marker>.x|y|z)")
      ->check(CLI::IsMember({"analog", "point"}));
  analyze->add_option("--mse", aa.mse, "Smoothing residual target (mm^2)");
  analyze->add_option("--max-gap", aa.max_gap, "Longest gap to fill (frames)");
  analyze->add_option("--out-strides", aa.out_strides, "Per-stride CSV (default: standard output)");
  analyze->add_option("--out-ensemble", aa.out_ensemble, "101-row ensemble CSV");
  analyze->add_option("--qc", aa.qc, "QC report JSON");
  analyze->add_option("--write-processed", aa.write_processed, "Directory for processed C3D trials");

  CompareArgs ca;
  auto* compare = app.add_subcommand("compare", "LME and TOST equivalence per stride feature");
  compare->add_option("--strides", ca.strides, "Per-stride CSV from analyze, repeatable")->required()->check(CLI::ExistingFile);
  compare->add_option("--conditions", ca.conditions, "Reference and test condition labels");
  compare->add_option("--feature", ca.features, "Feature column, repeatable (default: all present)");
  compare->add_option("--bound", ca.bounds, "Equivalence bound as feature=value, repeatable");
  compare->add_option("--side", ca.side, "left, right or both")->check(CLI::IsMember({"left", "right", "both"}));
  compare->add_option("--alpha", ca.alpha, "TOST significance level");
  compare->add_option("--angle-bound", ca.angle_bound, "Default bound for angle features (deg)");
  compare->add_option("--duration-bound", ca.duration_bound, "Default bound for duration features (s)");
  compare->add_option("--out", ca.out, "Verdict JSON file");
  compare->add_option("--format", ca.format, "json or table")->check(CLI::IsMember({"json", "table"}));

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Closed-loop cable tension simulation");
  simulate->add_option("--cycles", sa.cycles, "Gait cycles")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sa.seed, "Random seed");
  simulate->add_option("--gains", sa.gains, "kp,ki,kd,ff");
  simulate->add_option("--profile", sa.profile, "onset,peak,end GC% and peak torque (Nm)");
  simulate->add_option("--trace", sa.trace, "Per-tick trace CSV");
  simulate->add_option("--noise", sa.noise, "Load-cell noise SD (N)")->check(CLI::NonNegativeNumber);
  simulate->add_option("--fsr-noise", sa.fsr_noise, "FSR noise SD (normalized)")->check(CLI::NonNegativeNumber);
  simulate->add_option("--stride", sa.stride, "Stride duration (s)")->check(CLI::PositiveNumber);
  simulate->add_option("--jitter", sa.jitter, "Uniform stride jitter fraction")->check(CLI::Range(0.0, 0.99));
  simulate->add_option("--anchor-scale", sa.anchor_scale, "Cable path change per ankle radian (m)")
      ->check(CLI::NonNegativeNumber);
  simulate->add_option("--constant-reference", sa.constant_reference, "Track a constant tension (N)");
  simulate->add_option("--out", sa.out, "Also write the summary JSON to a file");

  ComplexityArgs xa;
  auto* complexity = app.add_subcommand("complexity", "Weighted device complexity index");
  complexity->add_option("--limbs", xa.limbs)->required();
  complexity->add_option("--dof", xa.dof)->required();
  complexity->add_option("--sensors", xa.sensors)->required();
  complexity->add_option("--actuators", xa.actuators)->required();
  complexity->add_option("--weights", xa.weights, "wL,wD,wS,wA")->required();

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::CallForVersion& v) {
      out << v.what() << '\n';
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      diagnose(err, "Usage", e.what());
      return kExitUsage;
    }
    if (*inspect) return cmd_inspect(ia, out);
    if (*analyze) return cmd_analyze(aa, out);
    if (*compare) return cmd_compare(ca, out);
    if (*simulate) return cmd_simulate(sa, out);
    if (*complexity) return cmd_complexity(xa, out);
    diagnose(err, "Usage", "no command given");
    return kExitUsage;
  } catch (const UsageError& e) {
    diagnose(err, "Usage", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    diagnose(err, to_string(e.code()), e.what());
    return kExitData;
  } catch (const std::exception& e) {
    diagnose(err, "Io", e.what());
    return kExitData;
  }
}

}  // namespace exogait::cli
