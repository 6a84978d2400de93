#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace linkcorr {

/// Seconds since 1970-01-01 00:00:00 on the feed's local wall clock (no zone handling).
using Timestamp = std::int64_t;

/// Accepts `YYYYMMDD, HH:MM:SS`, `YYYYMMDD HH:MM:SS`, and ISO-8601
/// `YYYY-MM-DD[T ]HH:MM:SS` with an optional trailing `Z`.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// `YYYY-MM-DDTHH:MM:SS`
std::string format_iso8601(Timestamp t);

/// 0..86399
int seconds_of_day(Timestamp t);

/// `HH:MM` or `HH:MM:SS` → seconds after midnight; 24:00 is accepted as 86400.
std::optional<int> parse_clock(std::string_view text);

}  // namespace linkcorr
