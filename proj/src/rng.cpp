#include "misalign/rng.hpp"

#include <cmath>
#include <limits>

namespace misalign {

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) {
        return lo;
    }
    const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
    if (span == std::numeric_limits<std::uint64_t>::max()) {
        return static_cast<std::int64_t>(engine_());
    }
    const std::uint64_t range = span + 1;
    // Reject the tail that would bias the modulo.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % range);
    std::uint64_t x = engine_();
    while (x >= limit) {
        x = engine_();
    }
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + x % range);
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
        u = 2.0 * uniform01() - 1.0;
        v = 2.0 * uniform01() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
}

double Rng::truncated_normal(double stddev) {
    if (stddev <= 0.0) {
        return 0.0;
    }
    double z = normal();
    while (std::abs(z) > 4.0) {
        z = normal();
    }
    return z * stddev;
}

}  // namespace misalign
