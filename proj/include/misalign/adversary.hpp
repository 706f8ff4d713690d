#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "misalign/pipeline.hpp"
#include "misalign/time.hpp"
#include "misalign/timebase.hpp"

namespace misalign {

enum class Capability { clock_desync, timestamp_forge, replay_impersonate };
enum class DelayKind { constant, uniform };

std::string to_string(Capability c);
std::string to_string(DelayKind k);
std::optional<Capability> parse_capability(const std::string& s);
std::optional<DelayKind> parse_delay_kind(const std::string& s);

/// Malicious delay in frames: either exactly k, or i.i.d. uniform on {0..k}.
struct DelayModel {
    DelayKind kind = DelayKind::constant;
    std::int64_t k = 0;
};

struct AttackSpec {
    std::vector<StreamId> targets;
    Capability capability = Capability::timestamp_forge;
    DelayModel delay;
    Duration stamp_offset{};
    Rational skew_ppm{};  // clock_desync only
    Duration lead = Duration::millis(5);
    std::int64_t history_depth = 1;
    TimePoint start_time{};
    std::uint64_t seed = 0;

    bool targets_stream(std::uint32_t index) const;
};

/// Delay in frames for one frame of one stream. Depends only on
/// (spec.seed, stream, seq), never on call order.
std::int64_t sample_delay(const AttackSpec& spec, std::uint32_t stream, std::int64_t seq);

struct FrameRecord {
    std::int64_t seq = 0;
    TimePoint t_act;
    PayloadRef payload;
};

/// Bounded record of the most recent genuine frames on one stream.
class FrameHistory {
public:
    explicit FrameHistory(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

    void record(const FrameRecord& frame);
    bool empty() const { return frames_.empty(); }
    std::size_t size() const { return frames_.size(); }
    const FrameRecord& newest() const { return frames_.back(); }
    const FrameRecord& oldest() const { return frames_.front(); }
    /// Frame with the given seq, if still buffered.
    const FrameRecord* find(std::int64_t seq) const;

private:
    std::size_t capacity_;
    std::deque<FrameRecord> frames_;
};

struct ForgeResult {
    std::optional<SensorPacket> packet;
    std::optional<std::string> note;
};

/// Stale content under a current stamp: payload and t_act come from frame
/// seq - d while t_pre stays the benign stamp of the current frame.
/// `history` must already contain the current frame.
ForgeResult stale_content_fresh_stamp(const AttackSpec& spec, const FrameHistory& history, const SensorPacket& benign);

/// Genuine content under a shifted stamp.
SensorPacket shift_stamp(const AttackSpec& spec, const SensorPacket& packet);

struct ScheduledForgery {
    TimePoint deliver_at;
    SensorPacket packet;
};

/// Impersonates a publisher: learns its cadence from observed arrivals and
/// schedules a replayed packet `lead` ahead of each predicted genuine arrival.
class ReplayImpersonator {
public:
    static constexpr double kEmaAlpha = 0.2;

    ReplayImpersonator(const AttackSpec& spec, StreamId stream);

    /// Feed one observed genuine arrival; returns the forgery to deliver
    /// before the next expected genuine packet, once the period is estimable.
    std::optional<ScheduledForgery> observe(const SensorPacket& genuine, TimePoint arrival);

    std::optional<double> arrival_interval_ns() const { return ema_arrival_; }

private:
    AttackSpec spec_;
    StreamId stream_;
    FrameHistory history_;
    std::optional<TimePoint> last_arrival_;
    std::optional<TimePoint> last_stamp_;
    std::int64_t last_seq_ = 0;
    std::optional<double> ema_arrival_;
    std::optional<double> ema_stamp_;
};

struct StreamTiming {
    StreamId id;
    Duration period{};
};

struct CaptureOutcome {
    SensorPacket packet;  // what actually goes on the wire
    std::vector<std::string> notes;
};

enum class AttackShape { benign, uni, mul };
std::string to_string(AttackShape s);

/// A scenario's full set of attacks wired onto its streams.
class Adversary {
public:
    /// Throws std::invalid_argument if a target is not one of `streams` or a
    /// stream is targeted twice.
    Adversary(std::vector<AttackSpec> specs, std::vector<StreamTiming> streams);

    AttackShape shape() const;

    /// Corrupts the stream's clock in place once its attack window opens.
    void before_stamp(std::uint32_t stream, TimePoint t_act, ClockModel& clock);

    /// Rewrites a freshly stamped genuine packet, if the stream is under a
    /// stamp-forging attack.
    CaptureOutcome on_capture(const SensorPacket& genuine);

    /// Observes a genuine delivery; may schedule a replayed packet.
    std::optional<ScheduledForgery> on_delivery(const SensorPacket& packet, TimePoint arrival);

    const std::vector<AttackSpec>& specs() const { return specs_; }
    const AttackSpec* spec_for(std::uint32_t stream) const;

private:
    std::vector<AttackSpec> specs_;
    std::vector<StreamTiming> streams_;
    std::vector<int> spec_of_stream_;
    std::vector<FrameHistory> histories_;
    std::vector<bool> clock_corrupted_;
    std::vector<std::optional<ReplayImpersonator>> replayers_;
};

inline Adversary apply_attack(std::vector<AttackSpec> specs, std::vector<StreamTiming> streams) {
    return Adversary(std::move(specs), std::move(streams));
}

}  // namespace misalign
