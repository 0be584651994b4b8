#pragma once
// Instants and durations.
//
// All time in the engine is simulator-controlled. An Instant is seconds
// since the Unix epoch (UTC); one-second resolution is the scheduling
// contract, so exact-gap checks compare to the second.

#include <cstdint>
#include <string>

namespace cupmem {

using Instant = std::int64_t;    // seconds since Unix epoch, UTC
using Duration = std::int64_t;   // seconds

constexpr Duration minutes(std::int64_t n) { return n * 60; }
constexpr Duration hours(std::int64_t n) { return n * 3600; }
constexpr Duration days(std::int64_t n) { return n * 86400; }

// Civil <-> epoch conversion (proleptic Gregorian, UTC).
std::int64_t days_from_civil(int year, unsigned month, unsigned day);
void civil_from_days(std::int64_t z, int& year, unsigned& month, unsigned& day);

// Builds an Instant from civil fields; validates ranges.
Instant make_instant(int year, unsigned month, unsigned day,
                     unsigned hour = 0, unsigned minute = 0, unsigned second = 0);

// Accepts "YYYY-MM-DD HH:MM" and "YYYY-MM-DD HH:MM:SS"; throws ParseError.
Instant parse_instant(const std::string& text);

// Renders "YYYY-MM-DD HH:MM:SS".
std::string format_instant(Instant t);

// First/last second of a civil year.
Instant year_start(int year);
Instant year_end(int year);

}  // namespace cupmem
