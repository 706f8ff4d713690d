#include "doctest.h"

#include <chrono>

#include "misalign/rng.hpp"
#include "misalign/synchronizer.hpp"
#include "sync_oracle.hpp"

using namespace misalign;
using misalign::testing::OracleSynchronizer;
using misalign::testing::random_case;
using misalign::testing::RandomCase;
using misalign::testing::same_emissions;

namespace {

SensorPacket packet(std::uint32_t stream, std::int64_t seq, std::int64_t t_pre_ns, std::int64_t frame = -1,
                    Modality m = Modality::other) {
    SensorPacket p;
    p.stream = StreamId{stream, m};
    p.seq = seq;
    p.t_pre = TimePoint{t_pre_ns};
    p.t_act = TimePoint{t_pre_ns};
    p.payload = PayloadRef{stream, frame < 0 ? seq : frame};
    return p;
}

std::vector<StreamSchedule> grid(std::size_t streams, Duration period) {
    return std::vector<StreamSchedule>(streams, StreamSchedule{period, {}});
}

constexpr std::int64_t kSec = 1'000'000'000;

}  // namespace

TEST_CASE("identical stamps pair immediately with zero spread") {
    Synchronizer sync(SyncPolicy{SyncMode::approximate, Duration::millis(10), 10}, grid(2, Duration::seconds(1)));
    CHECK(sync.push(packet(0, 0, kSec), TimePoint{kSec}).tuples.empty());
    auto r = sync.push(packet(1, 0, kSec), TimePoint{kSec});
    REQUIRE(r.tuples.size() == 1);
    CHECK(r.tuples[0].spread == Duration{0});
    CHECK(r.tuples[0].pivot == TimePoint{kSec});
    CHECK(r.tuples[0].t_sys == TimePoint{kSec});
}

TEST_CASE("stamps shifted five seconds pair five-frame-old content") {
    // LiDAR content is real-time but stamped +5 s, camera is benign, 1 Hz.
    Synchronizer sync(SyncPolicy{SyncMode::approximate, Duration::millis(600), 10}, grid(2, Duration::seconds(1)));
    std::vector<AlignedTuple> tuples;
    for (std::int64_t n = 0; n <= 15; ++n) {
        SensorPacket cam = packet(0, n, n * kSec, -1, Modality::camera);
        SensorPacket lidar = packet(1, n, n * kSec + 5 * kSec, -1, Modality::lidar);
        lidar.t_act = TimePoint{n * kSec};
        for (auto& t : sync.push(cam, TimePoint{n * kSec}).tuples) tuples.push_back(t);
        for (auto& t : sync.push(lidar, TimePoint{n * kSec}).tuples) tuples.push_back(t);
    }
    REQUIRE(tuples.size() == 11);
    for (const auto& t : tuples) {
        CHECK(t.spread == Duration{0});
        CHECK(t.content_offsets[0] == 0);
        CHECK(t.content_offsets[1] == -5);
        CHECK(t.t_sys - t.members[1].t_act == Duration::seconds(5));
    }
}

TEST_CASE("a half-period stamp shift resolves the tie toward the earlier frame") {
    // Camera frame 1 at 100 ms sees LiDAR candidates stamped 50 ms (frame 0)
    // and 150 ms (frame 1): equal spread, so the smaller pivot wins.
    const SyncPolicy policy{SyncMode::approximate, Duration::millis(50), 10};
    const std::int64_t ms = 1'000'000;
    Synchronizer sync(policy, grid(2, Duration::millis(100)));
    OracleSynchronizer oracle(policy, 2);

    const std::vector<SensorPacket> feed{packet(1, 0, 50 * ms), packet(1, 1, 150 * ms), packet(0, 1, 100 * ms)};
    std::vector<AlignedTuple> got;
    std::vector<misalign::testing::OracleEmission> want;
    for (const auto& p : feed) {
        for (auto& t : sync.push(p, TimePoint{150 * ms}).tuples) got.push_back(t);
        for (auto& e : oracle.push(p, TimePoint{150 * ms})) want.push_back(e);
    }
    REQUIRE(want.size() == 1);
    CHECK(want[0].members[1].seq == 0);
    REQUIRE(same_emissions(got, want));
    CHECK(got[0].spread == Duration::millis(50));
    // t_sys = 150 ms sits between frames 1 and 2 and rounds down to frame 1.
    CHECK(got[0].content_offsets[1] == -1);
}

TEST_CASE("oracle equivalence on 1000 random small instances") {
    const auto start = std::chrono::steady_clock::now();
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const RandomCase c = random_case(seed, false);
        Synchronizer sync(c.policy, grid(c.streams, Duration{5}));
        OracleSynchronizer oracle(c.policy, c.streams);
        std::vector<AlignedTuple> got;
        std::vector<misalign::testing::OracleEmission> want;
        int notes = 0;
        int oracle_dups = 0;
        for (std::size_t i = 0; i < c.packets.size(); ++i) {
            auto r = sync.push(c.packets[i], c.arrivals[i]);
            notes += static_cast<int>(r.notes.size());
            got.insert(got.end(), r.tuples.begin(), r.tuples.end());
            auto e = oracle.push(c.packets[i], c.arrivals[i], &oracle_dups);
            want.insert(want.end(), e.begin(), e.end());
        }
        INFO("seed " << seed);
        CHECK(same_emissions(got, want));
        CHECK(notes == oracle_dups);
    }
    CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(10));
}

TEST_CASE("emissions respect the window and are monotone per stream") {
    for (std::uint64_t seed = 5000; seed < 6000; ++seed) {
        const RandomCase c = random_case(seed, true);
        Synchronizer sync(c.policy, grid(c.streams, Duration{5}));
        std::vector<std::optional<TimePoint>> last(c.streams);
        for (std::size_t i = 0; i < c.packets.size(); ++i) {
            if (c.reset_before[i]) {
                sync.reset();
                std::fill(last.begin(), last.end(), std::nullopt);
            }
            for (const auto& t : sync.push(c.packets[i], c.arrivals[i]).tuples) {
                CHECK(t.spread <= c.policy.effective_slop());
                for (std::size_t s = 0; s < c.streams; ++s) {
                    if (last[s]) CHECK(t.members[s].t_pre > *last[s]);
                    last[s] = t.members[s].t_pre;
                }
            }
        }
    }
}

TEST_CASE("reset clears queues and the monotonic floor") {
    Synchronizer sync(SyncPolicy{SyncMode::approximate, Duration::millis(10), 10}, grid(2, Duration::seconds(1)));
    sync.push(packet(0, 0, 5 * kSec), TimePoint{0});
    REQUIRE(sync.push(packet(1, 0, 5 * kSec), TimePoint{0}).tuples.size() == 1);
    CHECK(sync.last_emitted(0) == TimePoint{5 * kSec});

    // Without a reset an older stamp can never be emitted again.
    sync.push(packet(0, 1, kSec), TimePoint{1});
    CHECK(sync.push(packet(1, 1, kSec), TimePoint{1}).tuples.empty());

    sync.reset();
    CHECK(sync.queue(0).empty());
    CHECK_FALSE(sync.last_emitted(0).has_value());
    sync.push(packet(0, 1, kSec), TimePoint{2});
    auto r = sync.push(packet(1, 1, kSec), TimePoint{2});
    REQUIRE(r.tuples.size() == 1);

    Synchronizer fresh(SyncPolicy{SyncMode::approximate, Duration::millis(10), 10}, grid(2, Duration::seconds(1)));
    fresh.push(packet(0, 1, kSec), TimePoint{2});
    auto f = fresh.push(packet(1, 1, kSec), TimePoint{2});
    REQUIRE(f.tuples.size() == 1);
    CHECK(f.tuples[0].members == r.tuples[0].members);
    CHECK(f.tuples[0].spread == r.tuples[0].spread);
}

TEST_CASE("duplicates are dropped with a note and the oldest entry is evicted") {
    Synchronizer sync(SyncPolicy{SyncMode::approximate, Duration{0}, 2}, grid(2, Duration{1}));
    CHECK(sync.push(packet(0, 0, 10), TimePoint{0}).notes.empty());
    auto dup = sync.push(packet(0, 0, 10), TimePoint{0});
    CHECK(dup.notes.size() == 1);
    CHECK(sync.queue(0).size() == 1);

    sync.push(packet(0, 1, 11), TimePoint{0});
    sync.push(packet(0, 2, 12), TimePoint{0});
    REQUIRE(sync.queue(0).size() == 2);
    CHECK(sync.queue(0).front().seq == 1);
    CHECK(sync.push(packet(1, 0, 10), TimePoint{0}).tuples.empty());
}

TEST_CASE("exact mode ignores the configured slop") {
    Synchronizer sync(SyncPolicy{SyncMode::exact, Duration::millis(100), 10}, grid(2, Duration::seconds(1)));
    sync.push(packet(0, 0, 1000), TimePoint{0});
    CHECK(sync.push(packet(1, 0, 1001), TimePoint{0}).tuples.empty());
    CHECK(sync.push(packet(1, 1, 1000), TimePoint{0}).tuples.size() == 1);
}

TEST_CASE("benign equal-rate streams pair fresh content") {
    const Duration period = Duration::millis(100);
    Synchronizer sync(SyncPolicy{SyncMode::approximate, Duration::millis(40), 10}, grid(3, period));
    std::size_t count = 0;
    for (std::int64_t n = 0; n < 200; ++n) {
        for (std::uint32_t s = 0; s < 3; ++s) {
            for (const auto& t : sync.push(packet(s, n, n * period.ns), TimePoint{n * period.ns}).tuples) {
                ++count;
                for (auto off : t.content_offsets) CHECK(off == 0);
            }
        }
    }
    CHECK(count == 200);
}

TEST_CASE("pairing depends on stamps only, never on content") {
    for (std::uint64_t seed = 100; seed < 400; ++seed) {
        const RandomCase c = random_case(seed, false);
        Synchronizer a(c.policy, grid(c.streams, Duration{5}));
        Synchronizer b(c.policy, grid(c.streams, Duration{5}));
        Rng g(seed);
        for (std::size_t i = 0; i < c.packets.size(); ++i) {
            SensorPacket altered = c.packets[i];
            altered.t_act = TimePoint{g.uniform_int(-1000, 1000)};
            altered.payload.frame = g.uniform_int(0, 50);
            altered.forged = true;
            const auto ra = a.push(c.packets[i], c.arrivals[i]).tuples;
            const auto rb = b.push(altered, c.arrivals[i]).tuples;
            REQUIRE(ra.size() == rb.size());
            for (std::size_t k = 0; k < ra.size(); ++k) {
                for (std::size_t s = 0; s < c.streams; ++s) {
                    CHECK(ra[k].members[s].seq == rb[k].members[s].seq);
                    CHECK(ra[k].members[s].t_pre == rb[k].members[s].t_pre);
                }
            }
        }
    }
}

TEST_CASE("push contract violations") {
    Synchronizer sync(SyncPolicy{}, grid(2, Duration{1}));
    CHECK_THROWS_AS(sync.push(packet(5, 0, 0), TimePoint{0}), std::invalid_argument);
    sync.push(packet(0, 0, 0), TimePoint{10});
    CHECK_THROWS_AS(sync.push(packet(1, 0, 0), TimePoint{9}), std::invalid_argument);
    CHECK_THROWS_AS(Synchronizer(SyncPolicy{SyncMode::approximate, Duration{-1}, 1}, grid(1, Duration{1})), std::invalid_argument);
}
