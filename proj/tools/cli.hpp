#pragma once

#include <iosfwd>
#include <string>

namespace exogait::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Output schema version written into every JSON document and CSV header comment-free outputs.
inline constexpr int kSchemaVersion = 1;

/// Runs one command line. Diagnostics go to `err` as a single line
/// `exogait: error[<Code>]: <message>`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Shortest round-trip decimal, always with a fractional part or exponent ("2.0", "2.25").
std::string format_number(double value);

}  // namespace exogait::cli
