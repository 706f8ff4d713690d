#include "misalign/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "misalign/rng.hpp"

namespace misalign {

std::string to_string(Capability c) {
    switch (c) {
        case Capability::clock_desync: return "clock_desync";
        case Capability::timestamp_forge: return "timestamp_forge";
        case Capability::replay_impersonate: return "replay_impersonate";
    }
    return "timestamp_forge";
}

std::string to_string(DelayKind k) { return k == DelayKind::constant ? "constant" : "uniform"; }

std::optional<Capability> parse_capability(const std::string& s) {
    if (s == "clock_desync") return Capability::clock_desync;
    if (s == "timestamp_forge") return Capability::timestamp_forge;
    if (s == "replay_impersonate") return Capability::replay_impersonate;
    return std::nullopt;
}

std::optional<DelayKind> parse_delay_kind(const std::string& s) {
    if (s == "constant") return DelayKind::constant;
    if (s == "uniform") return DelayKind::uniform;
    return std::nullopt;
}

std::string to_string(AttackShape s) {
    switch (s) {
        case AttackShape::benign: return "benign";
        case AttackShape::uni: return "uni";
        case AttackShape::mul: return "mul";
    }
    return "benign";
}

bool AttackSpec::targets_stream(std::uint32_t index) const {
    return std::any_of(targets.begin(), targets.end(), [&](const StreamId& t) { return t.index == index; });
}

std::int64_t sample_delay(const AttackSpec& spec, std::uint32_t stream, std::int64_t seq) {
    if (spec.delay.k <= 0) {
        return 0;
    }
    if (spec.delay.kind == DelayKind::constant) {
        return spec.delay.k;
    }
    Rng rng(hash_seed({spec.seed, stream, static_cast<std::uint64_t>(seq)}));
    return rng.uniform_int(0, spec.delay.k);
}

void FrameHistory::record(const FrameRecord& frame) {
    frames_.push_back(frame);
    while (frames_.size() > capacity_) {
        frames_.pop_front();
    }
}

const FrameRecord* FrameHistory::find(std::int64_t seq) const {
    for (const auto& f : frames_) {
        if (f.seq == seq) {
            return &f;
        }
    }
    return nullptr;
}

ForgeResult stale_content_fresh_stamp(const AttackSpec& spec, const FrameHistory& history, const SensorPacket& benign) {
    ForgeResult out;
    if (history.empty()) {
        return out;
    }
    const std::int64_t d = sample_delay(spec, benign.stream.index, benign.seq);
    const FrameRecord* source = history.find(benign.seq - d);
    if (source == nullptr) {
        source = &history.oldest();
        out.note = "stale content clamped: stream=" + std::to_string(benign.stream.index) +
                   " seq=" + std::to_string(benign.seq) + " wanted_delay=" + std::to_string(d) +
                   " used_frame=" + std::to_string(source->seq);
    }
    SensorPacket p = benign;
    p.t_act = source->t_act;
    p.payload = source->payload;
    p.forged = true;
    out.packet = p;
    return out;
}

SensorPacket shift_stamp(const AttackSpec& spec, const SensorPacket& packet) {
    SensorPacket p = packet;
    p.t_pre += spec.stamp_offset;
    p.forged = true;
    return p;
}

ReplayImpersonator::ReplayImpersonator(const AttackSpec& spec, StreamId stream)
    : spec_(spec), stream_(stream), history_(static_cast<std::size_t>(std::max<std::int64_t>(spec.history_depth, 1)) + 1) {}

std::optional<ScheduledForgery> ReplayImpersonator::observe(const SensorPacket& genuine, TimePoint arrival) {
    history_.record(FrameRecord{genuine.seq, genuine.t_act, genuine.payload});

    auto ema = [](std::optional<double>& state, double sample) {
        state = state ? kEmaAlpha * sample + (1.0 - kEmaAlpha) * *state : sample;
    };
    if (last_arrival_) {
        ema(ema_arrival_, static_cast<double>((arrival - *last_arrival_).ns));
        ema(ema_stamp_, static_cast<double>((genuine.t_pre - *last_stamp_).ns));
    }
    last_arrival_ = arrival;
    last_stamp_ = genuine.t_pre;
    last_seq_ = genuine.seq;

    if (!ema_arrival_) {
        return std::nullopt;
    }
    const TimePoint predicted = arrival + Duration{std::llround(*ema_arrival_)};
    const TimePoint deliver_at = predicted - spec_.lead;
    if (deliver_at <= arrival || deliver_at < spec_.start_time) {
        return std::nullopt;
    }

    const std::int64_t expected_seq = last_seq_ + 1;
    const FrameRecord* source = history_.find(expected_seq - spec_.history_depth);
    if (source == nullptr) {
        source = &history_.oldest();
    }
    SensorPacket forged;
    forged.stream = stream_;
    forged.seq = expected_seq;
    forged.t_act = source->t_act;
    forged.t_pre = genuine.t_pre + Duration{std::llround(*ema_stamp_)};
    forged.payload = source->payload;
    forged.forged = true;
    return ScheduledForgery{deliver_at, forged};
}

Adversary::Adversary(std::vector<AttackSpec> specs, std::vector<StreamTiming> streams)
    : specs_(std::move(specs)), streams_(std::move(streams)), spec_of_stream_(streams_.size(), -1),
      clock_corrupted_(streams_.size(), false), replayers_(streams_.size()) {
    std::size_t max_depth = 1;
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        const auto& spec = specs_[i];
        max_depth = std::max<std::size_t>(max_depth, static_cast<std::size_t>(std::max<std::int64_t>(spec.delay.k, 0)) + 1);
        for (const StreamId& t : spec.targets) {
            if (t.index >= streams_.size()) {
                throw std::invalid_argument("attack target references unknown stream index " + std::to_string(t.index));
            }
            if (spec_of_stream_[t.index] >= 0) {
                throw std::invalid_argument("stream " + std::to_string(t.index) + " is targeted by more than one attack");
            }
            spec_of_stream_[t.index] = static_cast<int>(i);
            if (spec.capability == Capability::replay_impersonate) {
                replayers_[t.index].emplace(spec, streams_[t.index].id);
            }
        }
    }
    histories_.assign(streams_.size(), FrameHistory(max_depth));
}

AttackShape Adversary::shape() const {
    std::set<std::uint32_t> targeted;
    for (const auto& spec : specs_) {
        for (const auto& t : spec.targets) {
            targeted.insert(t.index);
        }
    }
    if (targeted.empty()) return AttackShape::benign;
    return targeted.size() == 1 ? AttackShape::uni : AttackShape::mul;
}

const AttackSpec* Adversary::spec_for(std::uint32_t stream) const {
    if (stream >= spec_of_stream_.size() || spec_of_stream_[stream] < 0) {
        return nullptr;
    }
    return &specs_[static_cast<std::size_t>(spec_of_stream_[stream])];
}

void Adversary::before_stamp(std::uint32_t stream, TimePoint t_act, ClockModel& clock) {
    const AttackSpec* spec = spec_for(stream);
    if (spec == nullptr || spec->capability != Capability::clock_desync || clock_corrupted_[stream] ||
        t_act < spec->start_time) {
        return;
    }
    const Duration injected = spec->stamp_offset + streams_[stream].period * spec->delay.k;
    clock = corrupt_sync(clock, injected, spec->skew_ppm);
    clock_corrupted_[stream] = true;
}

CaptureOutcome Adversary::on_capture(const SensorPacket& genuine) {
    const std::uint32_t s = genuine.stream.index;
    histories_.at(s).record(FrameRecord{genuine.seq, genuine.t_act, genuine.payload});

    CaptureOutcome out{genuine, {}};
    const AttackSpec* spec = spec_for(s);
    if (spec == nullptr || spec->capability != Capability::timestamp_forge || genuine.t_act < spec->start_time) {
        return out;
    }
    ForgeResult stale = stale_content_fresh_stamp(*spec, histories_[s], genuine);
    if (stale.note) {
        out.notes.push_back(*stale.note);
    }
    if (stale.packet) {
        out.packet = shift_stamp(*spec, *stale.packet);
    }
    return out;
}

std::optional<ScheduledForgery> Adversary::on_delivery(const SensorPacket& packet, TimePoint arrival) {
    const std::uint32_t s = packet.stream.index;
    if (packet.forged || s >= replayers_.size() || !replayers_[s]) {
        return std::nullopt;
    }
    return replayers_[s]->observe(packet, arrival);
}

}  // namespace misalign
