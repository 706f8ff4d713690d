#include "misalign/timebase.hpp"

#include <cmath>

namespace misalign {

TimePoint ClockModel::local_time(TimePoint true_time) {
    const Rational& skew = params_.skew_ppm;
    const __int128 drift_num = static_cast<__int128>(skew.num()) * true_time.since_epoch().ns;
    const __int128 drift_den = static_cast<__int128>(skew.den()) * 1'000'000;
    const std::int64_t drift = round_div(drift_num, drift_den);

    std::int64_t jitter = 0;
    if (params_.jitter_stddev.ns > 0) {
        jitter = std::llround(rng_.truncated_normal(static_cast<double>(params_.jitter_stddev.ns)));
    }
    return true_time + params_.offset + Duration{drift + jitter};
}

ClockModel ClockModel::corrupt_sync(Duration injected_offset, Rational injected_skew_ppm) const {
    ClockModel out = *this;
    out.params_.offset += injected_offset;
    out.params_.skew_ppm = params_.skew_ppm + injected_skew_ppm;
    return out;
}

}  // namespace misalign
