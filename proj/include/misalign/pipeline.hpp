#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "misalign/rng.hpp"
#include "misalign/time.hpp"
#include "misalign/timebase.hpp"

namespace misalign {

enum class Modality { camera, lidar, other };

std::string to_string(Modality m);
std::optional<Modality> parse_modality(const std::string& s);

struct StreamId {
    std::uint32_t index = 0;
    Modality modality = Modality::other;

    friend bool operator==(const StreamId&, const StreamId&) = default;
};

/// Points at the captured frame whose content a packet carries. The frame
/// index equals the packet's seq for genuine packets; forged packets may carry
/// an older frame under a current seq.
struct PayloadRef {
    std::uint32_t stream = 0;
    std::int64_t frame = 0;

    friend bool operator==(const PayloadRef&, const PayloadRef&) = default;
};

struct SensorPacket {
    StreamId stream;
    std::int64_t seq = 0;
    TimePoint t_act;  // when the content was actually captured
    TimePoint t_pre;  // the timestamp the packet carries
    PayloadRef payload;
    bool forged = false;  // bookkeeping only, never read by the synchronizer

    friend bool operator==(const SensorPacket&, const SensorPacket&) = default;
};

/// Equality that ignores the provenance flag.
bool same_wire_content(const SensorPacket& a, const SensorPacket& b);

struct ChannelParams {
    Duration base_latency{};
    Duration jitter_stddev{};
    std::uint64_t seed = 0;
    bool allow_reorder = false;
};

/// One-way latency link from a publisher to the fusion node.
class Channel {
public:
    Channel() : Channel(ChannelParams{}) {}
    explicit Channel(const ChannelParams& params) : params_(params), rng_(params.seed) {}

    const ChannelParams& params() const { return params_; }

    /// Arrival time for a packet sent at t_send. Throws std::invalid_argument
    /// if t_send precedes the packet's capture.
    TimePoint transmit(const SensorPacket& packet, TimePoint t_send);

private:
    ChannelParams params_;
    Rng rng_;
    std::optional<TimePoint> last_arrival_;
};

inline TimePoint transmit(Channel& channel, const SensorPacket& packet, TimePoint t_send) {
    return channel.transmit(packet, t_send);
}

/// {phase, phase + period, ...} up to and including horizon.
std::vector<TimePoint> capture_schedule(Duration period, Duration phase, Duration horizon);

SensorPacket stamp_and_publish(StreamId stream, std::int64_t seq, TimePoint t_act, ClockModel& clock);

}  // namespace misalign
