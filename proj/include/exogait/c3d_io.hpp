#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "exogait/trial.hpp"

namespace exogait {

/// Largest marker count a C3D file can declare (POINT:USED read as unsigned 16-bit).
inline constexpr std::size_t kMaxC3dMarkers = 65535;

/// Parses an Intel-format (processor type 84) C3D file.
///
/// Points come back in mm: integer storage is multiplied by |POINT:SCALE|, and
/// POINT:UNITS = "m" or "cm" is converted. Analog samples are converted with
/// (raw - OFFSET) * SCALE * GEN_SCALE. Events are copied verbatim from the
/// EVENT group (TIMES row 0 = minutes, row 1 = seconds).
Trial read_c3d(std::span<const std::uint8_t> bytes);
Trial read_c3d_file(const std::filesystem::path& path);

/// Emits an Intel-format float C3D with POINT, ANALOG, EVENT, TRIAL and
/// METADATA groups. Residual words are written as 0 for valid frames, -1 for gaps.
std::vector<std::uint8_t> write_c3d(const Trial& trial);
void write_c3d_file(const Trial& trial, const std::filesystem::path& path);

/// CSV trial grammar:
///   time,<label>.x,<label>.y,<label>.z,...[,analog:<label>...]
/// One row per point frame. An empty x,y,z triple is a gap. The point rate is
/// taken from the time column; analog channels share the point rate.
Trial read_csv_trial(std::string_view text);

/// Event sidecar grammar: header `context,label,time`, then one event per row.
std::vector<EventRecord> read_events_csv(std::string_view text);

/// Maps stored event records to typed gait events, sorted by time (stable).
///
/// Accepted contexts: "Left", "Right" (case-insensitive). Accepted labels:
/// "Foot Strike", "Strike", "Heel Strike", "FootStrike" and "Foot Off", "Off",
/// "Toe Off", "FootOff" (case-insensitive). Anything else is UnknownEventLabel.
std::vector<GaitEvent> extract_events(const Trial& trial);
GaitEvent map_event(const EventRecord& record);

}  // namespace exogait
