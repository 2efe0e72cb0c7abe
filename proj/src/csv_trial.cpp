#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

#include "exogait/c3d_io.hpp"
#include "exogait/error.hpp"

namespace exogait {
namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_row(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                              : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    if (!trim(line).empty()) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

std::optional<double> parse_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw Error(ErrorCode::NonNumericCell, "cell '" + cell + "' is not a number");
  }
  return v;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

Trial read_csv_trial(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw Error(ErrorCode::BadHeaderRow, "CSV trial has no header row");
  const auto header = split_row(lines.front());
  if (header.empty() || lower(header[0]) != "time") {
    throw Error(ErrorCode::BadHeaderRow, "first CSV column must be 'time'");
  }

  Trial trial;
  // Column plan: marker index + axis, or analog index.
  struct Column {
    bool analog = false;
    std::size_t index = 0;
    int axis = 0;
  };
  std::vector<Column> plan;
  for (std::size_t c = 1; c < header.size();) {
    const std::string& h = header[c];
    if (h.rfind("analog:", 0) == 0) {
      const std::string label = h.substr(7);
      if (label.empty()) throw Error(ErrorCode::BadHeaderRow, "empty analog label in header");
      plan.push_back({true, trial.analogs.size(), 0});
      trial.analogs.push_back({label, "", {}, 0.0});
      ++c;
      continue;
    }
    if (c + 2 >= header.size()) {
      throw Error(ErrorCode::BadHeaderRow, "incomplete marker triple at '" + h + "'");
    }
    if (!ends_with(h, ".x")) throw Error(ErrorCode::BadHeaderRow, "expected '<label>.x', got '" + h + "'");
    const std::string label = h.substr(0, h.size() - 2);
    if (label.empty() || header[c + 1] != label + ".y" || header[c + 2] != label + ".z") {
      throw Error(ErrorCode::BadHeaderRow, "marker columns for '" + label + "' must be .x,.y,.z");
    }
    if (trial.find_marker(label) != nullptr) {
      throw Error(ErrorCode::BadHeaderRow, "duplicate marker label '" + label + "'");
    }
    for (int a = 0; a < 3; ++a) plan.push_back({false, trial.markers.size(), a});
    trial.markers.push_back({label, {}});
    c += 3;
  }

  std::vector<double> times;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split_row(lines[r]);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::RaggedRows, "row " + std::to_string(r + 1) + " has " +
                                             std::to_string(cells.size()) + " cells, expected " +
                                             std::to_string(header.size()));
    }
    const auto t = parse_number(cells[0]);
    if (!t) throw Error(ErrorCode::NonNumericCell, "row " + std::to_string(r + 1) + " has no time");
    times.push_back(*t);
    for (auto& m : trial.markers) m.frames.emplace_back();
    for (std::size_t c = 1; c < cells.size();) {
      const Column& col = plan[c - 1];
      if (col.analog) {
        const auto v = parse_number(cells[c]);
        if (!v) throw Error(ErrorCode::NonNumericCell, "empty analog cell in row " + std::to_string(r + 1));
        trial.analogs[col.index].samples.push_back(*v);
        ++c;
        continue;
      }
      PointFrame& pf = trial.markers[col.index].frames.back();
      const bool all_empty = cells[c].empty() && cells[c + 1].empty() && cells[c + 2].empty();
      if (all_empty) {
        pf.valid = false;
        pf.residual = -1.0f;
      } else {
        for (int a = 0; a < 3; ++a) {
          const auto v = parse_number(cells[c + static_cast<std::size_t>(a)]);
          if (!v) throw Error(ErrorCode::NonNumericCell, "partial coordinate triple in row " + std::to_string(r + 1));
          pf.xyz[static_cast<std::size_t>(a)] = *v;
        }
        pf.valid = true;
      }
      c += 3;
    }
  }

  if (times.size() < 2) throw Error(ErrorCode::RaggedRows, "CSV trial needs at least two data rows");
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(dt > 0.0)) throw Error(ErrorCode::NonUniformSampling, "CSV time column is not increasing");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs((times[i] - times[i - 1]) - dt) > 1e-6 * std::max(1.0, dt) + 1e-9) {
      throw Error(ErrorCode::NonUniformSampling, "CSV time column is not uniformly spaced");
    }
  }
  trial.point_rate = 1.0 / dt;
  trial.analog_rate = trial.point_rate;
  for (auto& a : trial.analogs) a.rate = trial.analog_rate;
  trial.first_frame = std::llround(times.front() * trial.point_rate) + 1;
  trial.last_frame = trial.first_frame + static_cast<std::int64_t>(times.size()) - 1;
  return trial;
}

std::vector<EventRecord> read_events_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw Error(ErrorCode::BadHeaderRow, "event CSV has no header row");
  const auto header = split_row(lines.front());
  if (header.size() != 3 || lower(header[0]) != "context" || lower(header[1]) != "label" ||
      lower(header[2]) != "time") {
    throw Error(ErrorCode::BadHeaderRow, "event CSV header must be 'context,label,time'");
  }
  std::vector<EventRecord> out;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split_row(lines[r]);
    if (cells.size() != 3) throw Error(ErrorCode::RaggedRows, "event row " + std::to_string(r + 1) + " is ragged");
    const auto t = parse_number(cells[2]);
    if (!t) throw Error(ErrorCode::NonNumericCell, "event row " + std::to_string(r + 1) + " has no time");
    out.push_back({cells[0], cells[1], *t});
  }
  return out;
}

GaitEvent map_event(const EventRecord& record) {
  const std::string ctx = lower(trim(record.context));
  const std::string lab = lower(trim(record.label));
  GaitEvent e;
  if (ctx == "left") {
    e.side = Side::Left;
  } else if (ctx == "right") {
    e.side = Side::Right;
  } else {
    throw Error(ErrorCode::UnknownEventLabel, "unknown event context '" + record.context + "'");
  }
  if (lab == "foot strike" || lab == "strike" || lab == "heel strike" || lab == "footstrike") {
    e.kind = EventKind::FootStrike;
  } else if (lab == "foot off" || lab == "off" || lab == "toe off" || lab == "footoff") {
    e.kind = EventKind::FootOff;
  } else {
    throw Error(ErrorCode::UnknownEventLabel, "unknown event label '" + record.label + "'");
  }
  e.time = record.time;
  return e;
}

std::vector<GaitEvent> extract_events(const Trial& trial) {
  std::vector<GaitEvent> out;
  out.reserve(trial.events.size());
  for (const auto& r : trial.events) out.push_back(map_event(r));
  // Ties broken by side then kind so the result does not depend on stored order.
  std::stable_sort(out.begin(), out.end(), [](const GaitEvent& a, const GaitEvent& b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.side != b.side) return a.side < b.side;
    return a.kind < b.kind;
  });
  return out;
}

}  // namespace exogait
