#include "cupmem/time.hpp"

#include <array>
#include <cstdio>

#include "cupmem/errors.hpp"

namespace cupmem {

// Howard Hinnant's civil-days algorithms.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, unsigned& month, unsigned& day) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = doy - (153 * mp + 2) / 5 + 1;
    month = mp + (mp < 10 ? 3 : -9);
    year = static_cast<int>(y + (month <= 2));
}

namespace {

bool leap(int y) { return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0); }

unsigned days_in_month(int y, unsigned m) {
    static constexpr std::array<unsigned, 12> k = {31, 28, 31, 30, 31, 30,
                                                   31, 31, 30, 31, 30, 31};
    if (m == 2 && leap(y)) return 29;
    return k[m - 1];
}

}  // namespace

Instant make_instant(int year, unsigned month, unsigned day,
                     unsigned hour, unsigned minute, unsigned second) {
    if (month < 1 || month > 12)
        throw ParseError("month out of range: " + std::to_string(month));
    if (day < 1 || day > days_in_month(year, month))
        throw ParseError("day out of range: " + std::to_string(day));
    if (hour > 23 || minute > 59 || second > 59)
        throw ParseError("time of day out of range");
    return days_from_civil(year, month, day) * 86400 +
           static_cast<std::int64_t>(hour) * 3600 + minute * 60 + second;
}

Instant parse_instant(const std::string& text) {
    int y = 0;
    unsigned mo = 0, d = 0, h = 0, mi = 0, s = 0;
    int n = std::sscanf(text.c_str(), "%d-%u-%u %u:%u:%u", &y, &mo, &d, &h, &mi, &s);
    if (n != 5 && n != 6)
        throw ParseError("bad instant '" + text + "', expected YYYY-MM-DD HH:MM[:SS]");
    return make_instant(y, mo, d, h, mi, n == 6 ? s : 0);
}

std::string format_instant(Instant t) {
    std::int64_t z = t / 86400;
    std::int64_t sod = t % 86400;
    if (sod < 0) {
        sod += 86400;
        z -= 1;
    }
    int y;
    unsigned mo, d;
    civil_from_days(z, y, mo, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u %02lld:%02lld:%02lld", y, mo, d,
                  static_cast<long long>(sod / 3600),
                  static_cast<long long>((sod % 3600) / 60),
                  static_cast<long long>(sod % 60));
    return buf;
}

Instant year_start(int year) { return make_instant(year, 1, 1, 0, 0, 0); }
Instant year_end(int year) { return make_instant(year, 12, 31, 23, 59, 59); }

}  // namespace cupmem
