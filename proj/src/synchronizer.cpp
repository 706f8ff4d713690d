#include "misalign/synchronizer.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace misalign {

std::int64_t StreamSchedule::nearest_frame(TimePoint t) const {
    if (period.ns <= 0) {
        return 0;
    }
    const std::int64_t rel = t.ns - phase.ns;
    if (rel <= 0) {
        return 0;
    }
    const std::int64_t lower = rel / period.ns;
    const std::int64_t rem = rel - lower * period.ns;
    return 2 * rem > period.ns ? lower + 1 : lower;
}

const SensorPacket* AlignedTuple::member(Modality m) const {
    for (const auto& p : members) {
        if (p.stream.modality == m) {
            return &p;
        }
    }
    return nullptr;
}

Synchronizer::Synchronizer(SyncPolicy policy, std::vector<StreamSchedule> schedules)
    : policy_(policy), schedules_(std::move(schedules)), queues_(schedules_.size()), last_emitted_(schedules_.size()) {
    if (policy_.queue_size < 1) {
        throw std::invalid_argument("Synchronizer: queue_size must be at least 1");
    }
    if (policy_.slop.ns < 0) {
        throw std::invalid_argument("Synchronizer: slop must be non-negative");
    }
    if (schedules_.empty()) {
        throw std::invalid_argument("Synchronizer: at least one stream required");
    }
}

void Synchronizer::reset() {
    for (auto& q : queues_) {
        q.packets.clear();
        q.positions.clear();
    }
    std::fill(last_emitted_.begin(), last_emitted_.end(), std::nullopt);
    last_arrival_.reset();
    next_position_ = 0;
}

PushResult Synchronizer::push(const SensorPacket& packet, TimePoint arrival) {
    const std::size_t s = packet.stream.index;
    if (s >= queues_.size()) {
        throw std::invalid_argument("Synchronizer::push: unknown stream index " + std::to_string(s));
    }
    if (last_arrival_ && arrival < *last_arrival_) {
        throw std::invalid_argument("Synchronizer::push: arrivals must be non-decreasing");
    }
    last_arrival_ = arrival;

    PushResult result;
    Queue& q = queues_[s];
    const bool duplicate = std::any_of(q.packets.begin(), q.packets.end(), [&](const SensorPacket& p) {
        return p.seq == packet.seq && p.t_pre == packet.t_pre;
    });
    if (duplicate) {
        result.notes.push_back("duplicate packet dropped: stream=" + std::to_string(s) +
                               " seq=" + std::to_string(packet.seq) + " t_pre=" + std::to_string(packet.t_pre.ns));
        return result;
    }

    q.packets.push_back(packet);
    q.positions.push_back(next_position_++);
    if (q.packets.size() > policy_.queue_size) {
        q.packets.pop_front();
        q.positions.pop_front();
    }

    while (auto choice = select()) {
        AlignedTuple tuple;
        tuple.t_sys = arrival;
        tuple.members.reserve(queues_.size());
        for (std::size_t i = 0; i < queues_.size(); ++i) {
            tuple.members.push_back(queues_[i].packets[(*choice)[i]]);
        }
        auto [lo, hi] = std::minmax_element(tuple.members.begin(), tuple.members.end(),
                                            [](const SensorPacket& a, const SensorPacket& b) { return a.t_pre < b.t_pre; });
        tuple.pivot = hi->t_pre;
        tuple.spread = hi->t_pre - lo->t_pre;
        tuple.content_offsets.reserve(queues_.size());
        for (std::size_t i = 0; i < queues_.size(); ++i) {
            tuple.content_offsets.push_back(tuple.members[i].payload.frame - schedules_[i].nearest_frame(arrival));
        }

        for (std::size_t i = 0; i < queues_.size(); ++i) {
            const TimePoint floor = tuple.members[i].t_pre;
            last_emitted_[i] = floor;
            Queue& qi = queues_[i];
            std::deque<SensorPacket> kept;
            std::deque<std::uint64_t> kept_pos;
            for (std::size_t j = 0; j < qi.packets.size(); ++j) {
                if (qi.packets[j].t_pre > floor) {
                    kept.push_back(qi.packets[j]);
                    kept_pos.push_back(qi.positions[j]);
                }
            }
            qi.packets = std::move(kept);
            qi.positions = std::move(kept_pos);
        }
        result.tuples.push_back(std::move(tuple));
    }
    return result;
}

// Finds the best (spread, pivot) window by trying every eligible stamp as the
// window minimum, then fills the window stream by stream with the smallest
// feasible (seq, t_pre, position) key.
std::optional<std::vector<std::size_t>> Synchronizer::select() const {
    const std::size_t m = queues_.size();
    const Duration slop = policy_.effective_slop();

    std::vector<std::vector<std::size_t>> eligible(m);
    std::vector<TimePoint> stamps;
    for (std::size_t s = 0; s < m; ++s) {
        const auto& q = queues_[s].packets;
        for (std::size_t j = 0; j < q.size(); ++j) {
            if (!last_emitted_[s] || q[j].t_pre > *last_emitted_[s]) {
                eligible[s].push_back(j);
                stamps.push_back(q[j].t_pre);
            }
        }
        if (eligible[s].empty()) {
            return std::nullopt;
        }
    }
    std::sort(stamps.begin(), stamps.end());
    stamps.erase(std::unique(stamps.begin(), stamps.end()), stamps.end());

    std::optional<std::pair<Duration, TimePoint>> best;
    TimePoint best_min;
    for (const TimePoint lo : stamps) {
        TimePoint hi = lo;
        bool ok = true;
        for (std::size_t s = 0; s < m && ok; ++s) {
            std::optional<TimePoint> first_at_or_after;
            for (std::size_t j : eligible[s]) {
                const TimePoint t = queues_[s].packets[j].t_pre;
                if (t >= lo && (!first_at_or_after || t < *first_at_or_after)) {
                    first_at_or_after = t;
                }
            }
            if (!first_at_or_after || *first_at_or_after - lo > slop) {
                ok = false;
            } else {
                hi = std::max(hi, *first_at_or_after);
            }
        }
        if (!ok) {
            continue;
        }
        const std::pair<Duration, TimePoint> key{hi - lo, hi};
        if (!best || key < *best) {
            best = key;
            best_min = lo;
        }
    }
    if (!best) {
        return std::nullopt;
    }

    const TimePoint lo = best_min;
    const TimePoint hi = best->second;

    // Per-stream options inside [lo, hi], ordered by the tie-break key.
    std::vector<std::vector<std::size_t>> options(m);
    std::vector<bool> has_lo(m, false);
    std::vector<bool> has_hi(m, false);
    for (std::size_t s = 0; s < m; ++s) {
        const auto& q = queues_[s];
        for (std::size_t j : eligible[s]) {
            const TimePoint t = q.packets[j].t_pre;
            if (t >= lo && t <= hi) {
                options[s].push_back(j);
                has_lo[s] = has_lo[s] || t == lo;
                has_hi[s] = has_hi[s] || t == hi;
            }
        }
        std::sort(options[s].begin(), options[s].end(), [&](std::size_t a, std::size_t b) {
            return std::tuple(q.packets[a].seq, q.packets[a].t_pre, q.positions[a]) <
                   std::tuple(q.packets[b].seq, q.packets[b].t_pre, q.positions[b]);
        });
    }

    // Can streams [from, m) still supply the missing window endpoints?
    auto feasible = [&](std::size_t from, bool need_lo, bool need_hi) {
        if (!need_lo && !need_hi) {
            return true;
        }
        if (need_lo && !need_hi) {
            return std::any_of(has_lo.begin() + static_cast<std::ptrdiff_t>(from), has_lo.end(), [](bool b) { return b; });
        }
        if (!need_lo && need_hi) {
            return std::any_of(has_hi.begin() + static_cast<std::ptrdiff_t>(from), has_hi.end(), [](bool b) { return b; });
        }
        if (lo == hi) {
            return std::any_of(has_lo.begin() + static_cast<std::ptrdiff_t>(from), has_lo.end(), [](bool b) { return b; });
        }
        for (std::size_t a = from; a < m; ++a) {
            for (std::size_t b = from; b < m; ++b) {
                if (a != b && has_lo[a] && has_hi[b]) {
                    return true;
                }
            }
        }
        return false;
    };

    std::vector<std::size_t> choice(m);
    bool got_lo = false;
    bool got_hi = false;
    for (std::size_t s = 0; s < m; ++s) {
        bool placed = false;
        for (std::size_t j : options[s]) {
            const TimePoint t = queues_[s].packets[j].t_pre;
            const bool next_lo = got_lo || t == lo;
            const bool next_hi = got_hi || t == hi;
            if (feasible(s + 1, !next_lo, !next_hi)) {
                choice[s] = j;
                got_lo = next_lo;
                got_hi = next_hi;
                placed = true;
                break;
            }
        }
        if (!placed) {
            throw std::logic_error("Synchronizer: window selection became infeasible");
        }
    }
    return choice;
}

}  // namespace misalign
