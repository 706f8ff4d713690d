#pragma once

// Brute-force reference for the synchronizer: every push enumerates the full
// cartesian product of the queues and keeps the candidate with the smallest
// (spread, pivot, per-stream (seq, t_pre, arrival ordinal)) key.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <tuple>
#include <vector>

#include "misalign/rng.hpp"
#include "misalign/synchronizer.hpp"

namespace misalign::testing {

struct OracleEmission {
    TimePoint t_sys;
    std::vector<SensorPacket> members;
};

class OracleSynchronizer {
public:
    OracleSynchronizer(SyncPolicy policy, std::size_t streams) : policy_(policy), queues_(streams), floor_(streams) {}

    std::vector<OracleEmission> push(const SensorPacket& packet, TimePoint arrival, int* duplicates = nullptr) {
        auto& q = queues_[packet.stream.index];
        for (const auto& e : q) {
            if (e.packet.seq == packet.seq && e.packet.t_pre == packet.t_pre) {
                if (duplicates) ++*duplicates;
                return {};
            }
        }
        q.push_back({packet, ordinal_++});
        if (q.size() > policy_.queue_size) {
            q.erase(q.begin());
        }

        std::vector<OracleEmission> out;
        while (true) {
            using Key = std::tuple<std::int64_t, std::int64_t, std::vector<std::tuple<std::int64_t, std::int64_t, std::uint64_t>>>;
            std::optional<Key> best_key;
            std::vector<std::size_t> best;

            const std::size_t m = queues_.size();
            if (std::any_of(queues_.begin(), queues_.end(), [](const auto& qq) { return qq.empty(); })) {
                break;
            }
            std::vector<std::size_t> idx(m, 0);
            while (true) {
                bool ok = true;
                std::int64_t lo = 0;
                std::int64_t hi = 0;
                std::vector<std::tuple<std::int64_t, std::int64_t, std::uint64_t>> seqs;
                for (std::size_t s = 0; s < m; ++s) {
                    const auto& e = queues_[s][idx[s]];
                    if (floor_[s] && e.packet.t_pre <= *floor_[s]) ok = false;
                    const std::int64_t t = e.packet.t_pre.ns;
                    lo = s == 0 ? t : std::min(lo, t);
                    hi = s == 0 ? t : std::max(hi, t);
                    seqs.emplace_back(e.packet.seq, t, e.ordinal);
                }
                if (ok && hi - lo <= policy_.effective_slop().ns) {
                    Key key{hi - lo, hi, seqs};
                    if (!best_key || key < *best_key) {
                        best_key = key;
                        best = idx;
                    }
                }
                std::size_t s = 0;
                while (s < m && ++idx[s] == queues_[s].size()) {
                    idx[s] = 0;
                    ++s;
                }
                if (s == m) break;
            }
            if (!best_key) break;

            OracleEmission em{arrival, {}};
            for (std::size_t s = 0; s < m; ++s) {
                em.members.push_back(queues_[s][best[s]].packet);
            }
            for (std::size_t s = 0; s < m; ++s) {
                floor_[s] = em.members[s].t_pre;
                std::erase_if(queues_[s], [&](const Entry& e) { return e.packet.t_pre <= *floor_[s]; });
            }
            out.push_back(std::move(em));
        }
        return out;
    }

    void reset() {
        for (auto& q : queues_) q.clear();
        std::fill(floor_.begin(), floor_.end(), std::nullopt);
    }

private:
    struct Entry {
        SensorPacket packet;
        std::uint64_t ordinal;
    };

    SyncPolicy policy_;
    std::vector<std::vector<Entry>> queues_;
    std::vector<std::optional<TimePoint>> floor_;
    std::uint64_t ordinal_ = 0;
};

inline SensorPacket oracle_packet(std::uint32_t stream, std::int64_t seq, std::int64_t t_pre_ns) {
    SensorPacket p;
    p.stream = StreamId{stream, Modality::other};
    p.seq = seq;
    p.t_pre = TimePoint{t_pre_ns};
    p.t_act = p.t_pre;
    p.payload = PayloadRef{stream, seq};
    return p;
}

// Seeded small instance: few streams, short queues, narrow stamp range.
struct RandomCase {
    SyncPolicy policy;
    std::size_t streams;
    std::vector<SensorPacket> packets;
    std::vector<TimePoint> arrivals;
    std::vector<bool> reset_before;
};

inline RandomCase random_case(std::uint64_t seed, bool with_resets) {
    Rng g(seed);
    RandomCase c;
    c.streams = static_cast<std::size_t>(g.uniform_int(1, 3));
    c.policy.mode = g.uniform_int(0, 4) == 0 ? SyncMode::exact : SyncMode::approximate;
    c.policy.slop = Duration{g.uniform_int(0, 6)};
    c.policy.queue_size = static_cast<std::size_t>(g.uniform_int(1, 6));
    const int pushes = static_cast<int>(g.uniform_int(1, 24));
    std::vector<std::int64_t> next_seq(c.streams, 0);
    std::int64_t now = 0;
    for (int i = 0; i < pushes; ++i) {
        const auto s = static_cast<std::uint32_t>(g.uniform_int(0, static_cast<std::int64_t>(c.streams) - 1));
        // Small stamp and seq ranges force ties and duplicates.
        const std::int64_t seq = g.uniform_int(0, 3) == 0 ? std::max<std::int64_t>(next_seq[s] - 1, 0) : next_seq[s]++;
        c.packets.push_back(oracle_packet(s, seq, g.uniform_int(0, 20)));
        now += g.uniform_int(0, 2);
        c.arrivals.emplace_back(now);
        c.reset_before.push_back(with_resets && g.uniform_int(0, 9) == 0);
    }
    return c;
}

inline bool same_emissions(const std::vector<AlignedTuple>& got, const std::vector<OracleEmission>& want) {
    if (got.size() != want.size()) return false;
    for (std::size_t i = 0; i < got.size(); ++i) {
        if (got[i].t_sys != want[i].t_sys || got[i].members != want[i].members) return false;
    }
    return true;
}

}  // namespace misalign::testing
