#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace misalign {

/// Signed span of simulated time in integer nanoseconds.
struct Duration {
    std::int64_t ns = 0;

    constexpr Duration() = default;
    constexpr explicit Duration(std::int64_t n) : ns(n) {}

    static constexpr Duration nanos(std::int64_t n) { return Duration{n}; }
    static constexpr Duration micros(std::int64_t n) { return Duration{n * 1'000}; }
    static constexpr Duration millis(std::int64_t n) { return Duration{n * 1'000'000}; }
    static constexpr Duration seconds(std::int64_t n) { return Duration{n * 1'000'000'000}; }

    constexpr auto operator<=>(const Duration&) const = default;

    constexpr Duration operator-() const { return Duration{-ns}; }
    constexpr Duration& operator+=(Duration d) { ns += d.ns; return *this; }
    constexpr Duration& operator-=(Duration d) { ns -= d.ns; return *this; }
    friend constexpr Duration operator+(Duration a, Duration b) { return Duration{a.ns + b.ns}; }
    friend constexpr Duration operator-(Duration a, Duration b) { return Duration{a.ns - b.ns}; }
    friend constexpr Duration operator*(Duration a, std::int64_t k) { return Duration{a.ns * k}; }
    friend constexpr Duration operator*(std::int64_t k, Duration a) { return Duration{a.ns * k}; }

    double to_seconds() const { return static_cast<double>(ns) * 1e-9; }
};

/// Instant on the simulation's true time axis, nanoseconds since epoch.
struct TimePoint {
    std::int64_t ns = 0;

    constexpr TimePoint() = default;
    constexpr explicit TimePoint(std::int64_t n) : ns(n) {}

    static constexpr TimePoint epoch() { return TimePoint{0}; }

    constexpr auto operator<=>(const TimePoint&) const = default;

    constexpr Duration since_epoch() const { return Duration{ns}; }
    constexpr TimePoint& operator+=(Duration d) { ns += d.ns; return *this; }
    friend constexpr TimePoint operator+(TimePoint t, Duration d) { return TimePoint{t.ns + d.ns}; }
    friend constexpr TimePoint operator+(Duration d, TimePoint t) { return TimePoint{t.ns + d.ns}; }
    friend constexpr TimePoint operator-(TimePoint t, Duration d) { return TimePoint{t.ns - d.ns}; }
    friend constexpr Duration operator-(TimePoint a, TimePoint b) { return Duration{a.ns - b.ns}; }

    double to_seconds() const { return static_cast<double>(ns) * 1e-9; }
};

/// Exact signed fraction with a positive denominator, always in lowest terms.
class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t num) : num_(num), den_(1) {}  // NOLINT(google-explicit-constructor)
    constexpr Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
        if (den_ == 0) {
            throw std::invalid_argument("Rational: zero denominator");
        }
        normalize();
    }

    constexpr std::int64_t num() const { return num_; }
    constexpr std::int64_t den() const { return den_; }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend constexpr Rational operator+(Rational a, Rational b) {
        return Rational{a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
    }
    friend constexpr Rational operator-(Rational a, Rational b) {
        return Rational{a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
    }
    friend constexpr Rational operator*(Rational a, Rational b) {
        return Rational{a.num_ * b.num_, a.den_ * b.den_};
    }
    friend constexpr Rational operator/(Rational a, Rational b) {
        if (b.num_ == 0) {
            throw std::invalid_argument("Rational: division by zero");
        }
        return Rational{a.num_ * b.den_, a.den_ * b.num_};
    }
    Rational& operator+=(Rational o) { return *this = *this + o; }

    friend constexpr bool operator==(Rational a, Rational b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend constexpr std::strong_ordering operator<=>(Rational a, Rational b) {
        return static_cast<__int128>(a.num_) * b.den_ <=> static_cast<__int128>(b.num_) * a.den_;
    }

    /// Parses "3", "-12.5" or "1/3".
    static Rational parse(const std::string& text);

    std::string to_string() const;

private:
    constexpr void normalize() {
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        const std::int64_t g = std::gcd(num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

/// Rounds num/den to the nearest integer, halves away from zero.
std::int64_t round_div(__int128 num, __int128 den);

}  // namespace misalign
