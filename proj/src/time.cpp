#include "misalign/time.hpp"

#include <charconv>

namespace misalign {

namespace {

std::int64_t parse_int(const std::string& s, const std::string& whole) {
    std::int64_t v = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || first == last) {
        throw std::invalid_argument("Rational: cannot parse '" + whole + "'");
    }
    return v;
}

}  // namespace

Rational Rational::parse(const std::string& text) {
    if (auto slash = text.find('/'); slash != std::string::npos) {
        return Rational{parse_int(text.substr(0, slash), text), parse_int(text.substr(slash + 1), text)};
    }
    if (auto dot = text.find('.'); dot != std::string::npos) {
        std::string int_part = text.substr(0, dot);
        const std::string frac = text.substr(dot + 1);
        if (frac.empty() || frac.size() > 12 || frac.find_first_not_of("0123456789") != std::string::npos) {
            throw std::invalid_argument("Rational: cannot parse '" + text + "'");
        }
        const bool negative = !int_part.empty() && int_part.front() == '-';
        if (int_part.empty() || int_part == "-" || int_part == "+") {
            int_part += "0";
        }
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) {
            den *= 10;
        }
        const std::int64_t whole = parse_int(int_part, text);
        const std::int64_t f = parse_int(frac, text);
        const std::int64_t magnitude = (whole < 0 ? -whole : whole) * den + f;
        return Rational{negative ? -magnitude : magnitude, den};
    }
    return Rational{parse_int(text, text)};
}

std::string Rational::to_string() const {
    if (den_ == 1) {
        return std::to_string(num_);
    }
    return std::to_string(num_) + "/" + std::to_string(den_);
}

std::int64_t round_div(__int128 num, __int128 den) {
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const bool negative = num < 0;
    const __int128 mag = negative ? -num : num;
    const __int128 q = (mag + den / 2) / den;
    return static_cast<std::int64_t>(negative ? -q : q);
}

}  // namespace misalign
