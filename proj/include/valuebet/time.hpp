#pragma once

#include "valuebet/error.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace valuebet {

using Timestamp = std::chrono::sys_seconds;
using Seconds = std::chrono::seconds;

namespace detail {

inline bool parse_fixed(std::string_view s, std::size_t pos, std::size_t len, int& out)
{
    if (pos + len > s.size())
        return false;
    for (std::size_t i = pos; i < pos + len; ++i)
        if (s[i] < '0' || s[i] > '9')
            return false;
    auto res = std::from_chars(s.data() + pos, s.data() + pos + len, out);
    return res.ec == std::errc{};
}

} // namespace detail

/// Parses "YYYY-MM-DD[T ]HH:MM[:SS][.fff][Z|+HH:MM|-HH:MM]" and normalizes to UTC.
/// A missing zone designator is read as UTC. Fractional seconds are truncated.
inline std::optional<Timestamp> parse_timestamp(std::string_view s)
{
    using namespace std::chrono;
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    if (!detail::parse_fixed(s, 0, 4, y) || s.size() < 16 || s[4] != '-' || s[7] != '-')
        return std::nullopt;
    if (!detail::parse_fixed(s, 5, 2, mo) || !detail::parse_fixed(s, 8, 2, d))
        return std::nullopt;
    if (s[10] != 'T' && s[10] != ' ')
        return std::nullopt;
    if (!detail::parse_fixed(s, 11, 2, h) || s[13] != ':' || !detail::parse_fixed(s, 14, 2, mi))
        return std::nullopt;
    std::size_t pos = 16;
    if (pos < s.size() && s[pos] == ':') {
        if (!detail::parse_fixed(s, pos + 1, 2, sec))
            return std::nullopt;
        pos += 3;
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            std::size_t start = pos;
            while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9')
                ++pos;
            if (pos == start)
                return std::nullopt;
        }
    }
    long offset_minutes = 0;
    if (pos < s.size()) {
        char z = s[pos];
        if (z == 'Z' || z == 'z') {
            ++pos;
        } else if (z == '+' || z == '-') {
            int oh = 0, om = 0;
            if (!detail::parse_fixed(s, pos + 1, 2, oh))
                return std::nullopt;
            std::size_t next = pos + 3;
            if (next < s.size() && s[next] == ':')
                ++next;
            if (!detail::parse_fixed(s, next, 2, om))
                return std::nullopt;
            offset_minutes = (z == '+' ? 1 : -1) * (oh * 60L + om);
            pos = next + 2;
        } else {
            return std::nullopt;
        }
    }
    if (pos != s.size())
        return std::nullopt;
    if (h > 23 || mi > 59 || sec > 60)
        return std::nullopt;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok())
        return std::nullopt;
    auto tp = sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} - minutes{offset_minutes};
    return time_point_cast<seconds>(tp);
}

inline Timestamp parse_timestamp_or_throw(std::string_view s)
{
    auto ts = parse_timestamp(s);
    if (!ts)
        throw Error(ErrorCode::SchemaError, "unparseable timestamp '" + std::string(s) + "'");
    return *ts;
}

/// Canonical form: "YYYY-MM-DDTHH:MM:SSZ".
inline std::string format_timestamp(Timestamp ts)
{
    using namespace std::chrono;
    auto day_point = floor<days>(ts);
    year_month_day ymd{day_point};
    hh_mm_ss<seconds> tod{ts - day_point};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                  static_cast<long>(tod.seconds().count()));
    return buf;
}

} // namespace valuebet
