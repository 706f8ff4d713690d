#include "misalign/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace misalign {

std::string to_string(Modality m) {
    switch (m) {
        case Modality::camera: return "camera";
        case Modality::lidar: return "lidar";
        case Modality::other: return "other";
    }
    return "other";
}

std::optional<Modality> parse_modality(const std::string& s) {
    if (s == "camera") return Modality::camera;
    if (s == "lidar") return Modality::lidar;
    if (s == "other") return Modality::other;
    return std::nullopt;
}

bool same_wire_content(const SensorPacket& a, const SensorPacket& b) {
    return a.stream == b.stream && a.seq == b.seq && a.t_act == b.t_act && a.t_pre == b.t_pre &&
           a.payload == b.payload;
}

TimePoint Channel::transmit(const SensorPacket& packet, TimePoint t_send) {
    if (t_send < packet.t_act) {
        throw std::invalid_argument("transmit: send time precedes capture time");
    }
    std::int64_t latency = params_.base_latency.ns;
    if (params_.jitter_stddev.ns > 0) {
        latency += std::llround(rng_.truncated_normal(static_cast<double>(params_.jitter_stddev.ns)));
    }
    latency = std::max<std::int64_t>(latency, 0);

    TimePoint arrival = t_send + Duration{latency};
    if (!params_.allow_reorder && last_arrival_ && arrival <= *last_arrival_) {
        arrival = *last_arrival_ + Duration{1};
    }
    last_arrival_ = arrival;
    return arrival;
}

std::vector<TimePoint> capture_schedule(Duration period, Duration phase, Duration horizon) {
    if (period.ns <= 0) {
        throw std::invalid_argument("capture_schedule: period must be positive");
    }
    if (phase.ns < 0 || phase >= period) {
        throw std::invalid_argument("capture_schedule: phase must lie in [0, period)");
    }
    std::vector<TimePoint> out;
    if (horizon < phase) {
        return out;
    }
    const std::int64_t count = (horizon.ns - phase.ns) / period.ns + 1;
    out.reserve(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) {
        out.emplace_back(phase.ns + i * period.ns);
    }
    return out;
}

SensorPacket stamp_and_publish(StreamId stream, std::int64_t seq, TimePoint t_act, ClockModel& clock) {
    SensorPacket p;
    p.stream = stream;
    p.seq = seq;
    p.t_act = t_act;
    p.t_pre = clock.local_time(t_act);
    p.payload = PayloadRef{stream.index, seq};
    p.forged = false;
    return p;
}

}  // namespace misalign
