#include "linkcorr/timeutil.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace linkcorr {

namespace {

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    for (std::size_t i = pos; i < pos + len; ++i)
        if (s[i] < '0' || s[i] > '9') return false;
    return std::from_chars(s.data() + pos, s.data() + pos + len, out).ec == std::errc{};
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
        s.remove_suffix(1);
    return s;
}

std::optional<int> parse_hms(std::string_view s) {
    int h = 0, m = 0, sec = 0;
    if (s.size() != 8 || s[2] != ':' || s[5] != ':') return std::nullopt;
    if (!read_int(s, 0, 2, h) || !read_int(s, 3, 2, m) || !read_int(s, 6, 2, sec)) return std::nullopt;
    if (h > 23 || m > 59 || sec > 60) return std::nullopt;
    return h * 3600 + m * 60 + sec;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    using namespace std::chrono;
    std::string_view s = trim(text);
    if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);

    int y = 0, mo = 0, d = 0;
    std::string_view rest;
    if (s.size() >= 10 && s[4] == '-' && s[7] == '-') {
        if (!read_int(s, 0, 4, y) || !read_int(s, 5, 2, mo) || !read_int(s, 8, 2, d)) return std::nullopt;
        rest = s.substr(10);
        if (rest.empty() || (rest.front() != 'T' && rest.front() != ' ')) return std::nullopt;
        rest.remove_prefix(1);
    } else if (s.size() >= 8) {
        if (!read_int(s, 0, 4, y) || !read_int(s, 4, 2, mo) || !read_int(s, 6, 2, d)) return std::nullopt;
        rest = s.substr(8);
        if (!rest.empty() && rest.front() == ',') rest.remove_prefix(1);
        if (rest.empty() || rest.front() != ' ') return std::nullopt;
        rest = trim(rest);
    } else {
        return std::nullopt;
    }

    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    const auto tod = parse_hms(rest);
    if (!tod) return std::nullopt;
    return static_cast<Timestamp>(sys_days{ymd}.time_since_epoch().count()) * 86400 + *tod;
}

std::string format_iso8601(Timestamp t) {
    using namespace std::chrono;
    Timestamp days_since = t / 86400;
    Timestamp secs = t % 86400;
    if (secs < 0) {
        secs += 86400;
        --days_since;
    }
    const year_month_day ymd{sys_days{days{days_since}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(secs / 3600),
                  static_cast<int>(secs / 60 % 60), static_cast<int>(secs % 60));
    return buf;
}

int seconds_of_day(Timestamp t) {
    Timestamp s = t % 86400;
    if (s < 0) s += 86400;
    return static_cast<int>(s);
}

std::optional<int> parse_clock(std::string_view text) {
    std::string_view s = trim(text);
    int h = 0, m = 0, sec = 0;
    if (s.size() == 5 && s[2] == ':') {
        if (!read_int(s, 0, 2, h) || !read_int(s, 3, 2, m)) return std::nullopt;
    } else if (s.size() == 8 && s[2] == ':' && s[5] == ':') {
        if (!read_int(s, 0, 2, h) || !read_int(s, 3, 2, m) || !read_int(s, 6, 2, sec)) return std::nullopt;
    } else {
        return std::nullopt;
    }
    if (m > 59 || sec > 59) return std::nullopt;
    const int total = h * 3600 + m * 60 + sec;
    if (total > 86400) return std::nullopt;
    return total;
}

}  // namespace linkcorr
