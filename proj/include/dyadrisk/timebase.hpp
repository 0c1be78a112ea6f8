#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace dyadrisk {

// Times are stored as integer milliseconds. Input files carry decimal
// seconds (RTTM/CTM use centisecond precision); sub-millisecond digits are
// rounded half-to-even so repeated load/dump cycles are stable.
using TimeMs = std::int64_t;

// Parses a plain decimal-seconds literal ("12.345", "0.50", "7").
// Throws Error on malformed input. Exact: no intermediate floating point.
TimeMs ms_from_seconds_str(std::string_view text);

// Conversion for values that arrive as JSON numbers. Uses the current FP
// rounding mode (round-to-nearest-even by default).
TimeMs ms_from_seconds(double seconds);

double seconds_from_ms(TimeMs ms);

// Fixed three-decimal rendering, e.g. 500 -> "0.500".
std::string format_seconds(TimeMs ms);

}  // namespace dyadrisk
