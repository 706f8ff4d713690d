#pragma once

#include <cstdint>

#include "misalign/rng.hpp"
#include "misalign/time.hpp"

namespace misalign {

struct ClockParams {
    Duration offset{};
    Rational skew_ppm{};
    Duration jitter_stddev{};
    std::uint64_t seed = 0;

    friend bool operator==(const ClockParams&, const ClockParams&) = default;
};

/// Affine device clock with two-sided truncated-normal read jitter.
///
/// The reading for a true instant t is
///   t + offset + skew_ppm * (t - epoch) / 1e6 + jitter,
/// with the skew term rounded to the nearest nanosecond. Reads advance the
/// clock's private RNG, so the sequence of readings depends on the sequence
/// of queries and nothing else.
class ClockModel {
public:
    ClockModel() : ClockModel(ClockParams{}) {}
    explicit ClockModel(const ClockParams& params) : params_(params), rng_(params.seed) {}

    const ClockParams& params() const { return params_; }

    TimePoint local_time(TimePoint true_time);

    /// Grandmaster spoofing: shifts offset and skew, keeps the RNG cursor.
    ClockModel corrupt_sync(Duration injected_offset, Rational injected_skew_ppm) const;

    friend bool operator==(const ClockModel&, const ClockModel&) = default;

private:
    ClockParams params_;
    Rng rng_;
};

inline TimePoint local_time(ClockModel& clock, TimePoint true_time) {
    return clock.local_time(true_time);
}

inline ClockModel corrupt_sync(const ClockModel& clock, Duration injected_offset, Rational injected_skew_ppm) {
    return clock.corrupt_sync(injected_offset, injected_skew_ppm);
}

}  // namespace misalign
