#include "dyadrisk/timebase.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "dyadrisk/error.hpp"

namespace dyadrisk {

TimeMs ms_from_seconds_str(std::string_view text) {
    if (text.empty()) throw Error("empty time literal");
    std::size_t i = 0;
    bool negative = false;
    if (text[i] == '+' || text[i] == '-') {
        negative = text[i] == '-';
        ++i;
    }
    if (i == text.size()) throw Error("malformed time literal '" + std::string(text) + "'");

    std::int64_t whole = 0;
    bool any_digit = false;
    for (; i < text.size() && text[i] != '.'; ++i) {
        char c = text[i];
        if (c < '0' || c > '9')
            throw Error("malformed time literal '" + std::string(text) + "'");
        whole = whole * 10 + (c - '0');
        any_digit = true;
        if (whole > (INT64_MAX / 1000 - 1)) throw Error("time literal out of range");
    }

    // First three fractional digits are milliseconds; the rest decide rounding.
    int frac_digits[3] = {0, 0, 0};
    int nfrac = 0;
    int round_dir = 0;  // -1 down, +1 up, 0 exactly half (so far)
    bool saw_half_digit = false;
    if (i < text.size() && text[i] == '.') {
        ++i;
        std::size_t pos = 0;
        for (; i < text.size(); ++i, ++pos) {
            char c = text[i];
            if (c < '0' || c > '9')
                throw Error("malformed time literal '" + std::string(text) + "'");
            any_digit = true;
            int d = c - '0';
            if (pos < 3) {
                frac_digits[pos] = d;
                ++nfrac;
            } else if (pos == 3) {
                saw_half_digit = true;
                if (d > 5) round_dir = 1;
                else if (d < 5) round_dir = -1;
            } else if (round_dir == 0 && saw_half_digit && d != 0) {
                round_dir = 1;  // beyond an exact half: rounds up
            }
        }
    }
    (void)nfrac;
    if (!any_digit) throw Error("malformed time literal '" + std::string(text) + "'");

    std::int64_t ms = whole * 1000 + frac_digits[0] * 100 + frac_digits[1] * 10 + frac_digits[2];
    if (saw_half_digit) {
        if (round_dir > 0) ++ms;
        else if (round_dir == 0 && (ms % 2 != 0)) ++ms;  // exact half: to even
    }
    return negative ? -ms : ms;
}

TimeMs ms_from_seconds(double seconds) {
    return static_cast<TimeMs>(std::nearbyint(seconds * 1000.0));
}

double seconds_from_ms(TimeMs ms) { return static_cast<double>(ms) / 1000.0; }

std::string format_seconds(TimeMs ms) {
    char buf[40];
    TimeMs a = ms < 0 ? -ms : ms;
    std::snprintf(buf, sizeof(buf), "%s%lld.%03lld", ms < 0 ? "-" : "",
                  static_cast<long long>(a / 1000), static_cast<long long>(a % 1000));
    return buf;
}

void ValidationReport::merge(const ValidationReport& other) {
    errors.insert(errors.end(), other.errors.begin(), other.errors.end());
    warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
}

std::string Issue::to_string() const {
    std::string s;
    if (!session_id.empty()) s += session_id + ": ";
    if (!field.empty()) s += "[" + field + "] ";
    s += message;
    return s;
}

std::string ValidationReport::to_string() const {
    std::string s;
    for (const auto& e : errors) s += "error: " + e.to_string() + "\n";
    for (const auto& w : warnings) s += "warning: " + w.to_string() + "\n";
    return s;
}

}  // namespace dyadrisk
