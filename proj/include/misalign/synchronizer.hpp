#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "misalign/pipeline.hpp"
#include "misalign/time.hpp"

namespace misalign {

enum class SyncMode { exact, approximate };

struct SyncPolicy {
    SyncMode mode = SyncMode::approximate;
    Duration slop = Duration::millis(40);
    std::size_t queue_size = 10;

    /// Exact matching is approximate matching with a zero window.
    Duration effective_slop() const { return mode == SyncMode::exact ? Duration{0} : slop; }
};

/// Nominal sampling grid of a stream, used to express content age in frames.
struct StreamSchedule {
    Duration period{};
    Duration phase{};

    /// Index of the capture instant nearest t (ties go to the earlier frame).
    std::int64_t nearest_frame(TimePoint t) const;
};

struct AlignedTuple {
    std::vector<SensorPacket> members;  // indexed by stream
    TimePoint t_sys;                    // true time the tuple was emitted
    TimePoint pivot;                    // latest member stamp
    Duration spread{};                  // latest minus earliest member stamp
    std::vector<std::int64_t> content_offsets;

    const SensorPacket* member(Modality m) const;
};

struct PushResult {
    std::vector<AlignedTuple> tuples;
    std::vector<std::string> notes;
};

/// Timestamp-driven alignment of m streams.
///
/// Every push runs the matcher to quiescence. A candidate holds one queued
/// packet per stream, each stamped strictly after that stream's last emitted
/// stamp, with stamp spread within the slop. The emitted candidate minimizes
/// (spread, pivot, per-stream (seq, t_pre, queue position) in stream order).
/// After emission, queued packets stamped at or before their stream's emitted
/// member are discarded.
///
/// Only t_pre, seq and arrival order influence the result; content and true
/// capture time are carried through untouched.
class Synchronizer {
public:
    Synchronizer(SyncPolicy policy, std::vector<StreamSchedule> schedules);

    PushResult push(const SensorPacket& packet, TimePoint arrival);
    void reset();

    std::size_t stream_count() const { return queues_.size(); }
    const SyncPolicy& policy() const { return policy_; }
    const std::deque<SensorPacket>& queue(std::size_t stream) const { return queues_.at(stream).packets; }
    std::optional<TimePoint> last_emitted(std::size_t stream) const { return last_emitted_.at(stream); }

private:
    struct Queue {
        std::deque<SensorPacket> packets;
        std::deque<std::uint64_t> positions;  // arrival ordinal of each queued packet
    };

    std::optional<std::vector<std::size_t>> select() const;

    SyncPolicy policy_;
    std::vector<StreamSchedule> schedules_;
    std::vector<Queue> queues_;
    std::vector<std::optional<TimePoint>> last_emitted_;
    std::optional<TimePoint> last_arrival_;
    std::uint64_t next_position_ = 0;
};

}  // namespace misalign
