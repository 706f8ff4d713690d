#include "doctest.h"

#include <functional>

#include "misalign/metrics.hpp"
#include "misalign/rng.hpp"

using namespace misalign;

namespace {

std::vector<GroundTruthObject> gt_at(std::vector<Vec2> ps) {
    std::vector<GroundTruthObject> out;
    for (std::size_t i = 0; i < ps.size(); ++i) out.push_back({static_cast<std::int64_t>(i), ObjectClass::car, ps[i]});
    return out;
}

Track hyp(std::int64_t tid, Vec2 p) {
    Track t;
    t.tid = tid;
    t.position = p;
    return t;
}

// Largest one-to-one matching within the radius, by exhaustive search.
std::int64_t optimal_tp(const std::vector<Vec2>& dets, const std::vector<GroundTruthObject>& gt, double radius) {
    std::vector<bool> used(dets.size(), false);
    std::function<std::int64_t(std::size_t)> go = [&](std::size_t i) -> std::int64_t {
        if (i == gt.size()) return 0;
        std::int64_t best = go(i + 1);
        for (std::size_t j = 0; j < dets.size(); ++j) {
            if (!used[j] && distance(gt[i].position, dets[j]) <= radius) {
                used[j] = true;
                best = std::max(best, 1 + go(i + 1));
                used[j] = false;
            }
        }
        return best;
    };
    return go(0);
}

}  // namespace

TEST_CASE("perfect detections") {
    const auto gt = gt_at({{1, 1}, {5, 5}, {9, 9}});
    const std::vector<Vec2> dets{{9, 9}, {1, 1}, {5, 5}};
    const auto r = match_frame(dets, gt, 2.0);
    CHECK(r.tp == 3);
    CHECK(r.fp == 0);
    CHECK(r.fn == 0);
}

TEST_CASE("one phantom and one miss") {
    const auto gt = gt_at({{0, 0}, {10, 0}, {20, 0}});
    const std::vector<Vec2> dets{{0.5, 0}, {10, 0.5}, {50, 50}};
    const auto r = match_frame(dets, gt, 2.0);
    CHECK(r.tp == 2);
    CHECK(r.fp == 1);
    CHECK(r.fn == 1);
    CHECK(r.missed_oids == std::vector<std::int64_t>{2});
    CHECK(r.false_detections == std::vector<std::size_t>{2});
}

TEST_CASE("match_frame rejects a non-positive radius") {
    CHECK_THROWS_AS(match_frame({}, {}, 0.0), std::invalid_argument);
}

TEST_CASE("greedy matching against the exhaustive optimum") {
    Rng g(4242);
    const double radius = 2.0;
    int frames = 0;
    while (frames < 100) {
        std::vector<Vec2> pts;
        const auto n = g.uniform_int(1, 6);
        for (std::int64_t i = 0; i < n; ++i) pts.push_back({g.uniform01() * 30.0, g.uniform01() * 30.0});
        bool separated = true;
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j) separated = separated && distance(pts[i], pts[j]) > radius;
        if (!separated) continue;
        ++frames;
        const auto gt = gt_at(pts);
        std::vector<Vec2> dets;
        const auto m = g.uniform_int(0, 6);
        for (std::int64_t j = 0; j < m; ++j) {
            const Vec2 base = pts[static_cast<std::size_t>(g.uniform_int(0, n - 1))];
            dets.push_back(base + Vec2{g.uniform01() * 5.0 - 2.5, g.uniform01() * 5.0 - 2.5});
        }
        const auto r = match_frame(dets, gt, radius);
        const auto best = optimal_tp(dets, gt, radius);
        CHECK(r.tp <= best);
        CHECK(r.tp >= best - 1);
        CHECK(r.tp + r.fn == static_cast<std::int64_t>(gt.size()));
        CHECK(r.tp + r.fp == static_cast<std::int64_t>(dets.size()));
    }
}

TEST_CASE("MOTA arithmetic is exact") {
    CHECK(*mota(1, 1, 1, 10) == Rational{7, 10});
    CHECK(*mota(0, 0, 0, 4) == Rational{1});
    CHECK(*mota(3, 0, 0, 3) == Rational{0});
    CHECK(*mota(2, 5, 1, 4) == Rational{-1});
    CHECK(*mota(0, 1, 0, 3) == Rational{2, 3});
    CHECK(*mota(1, 0, 2, 7) == Rational{4, 7});
    CHECK_FALSE(mota(0, 3, 0, 0));
}

TEST_CASE("MOTA from hand-built tracking micro-traces") {
    SUBCASE("perfect run") {
        TrackingEvaluator ev(2.0);
        for (int f = 0; f < 5; ++f) {
            const auto gt = gt_at({{0, 0}, {10, 0}});
            const std::vector<Track> h{hyp(0, {0, 0}), hyp(1, {10, 0})};
            CHECK(ev.add_frame(gt, h) == 0);
        }
        CHECK(*mota(ev) == Rational{1});
    }
    SUBCASE("one miss, one phantom, one switch over ten gt") {
        TrackingEvaluator ev(2.0);
        const auto two = gt_at({{0, 0}, {10, 0}});
        ev.add_frame(two, std::vector<Track>{hyp(0, {0, 0}), hyp(1, {10, 0})});
        ev.add_frame(two, std::vector<Track>{hyp(0, {0, 0}), hyp(1, {10, 0}), hyp(9, {40, 0})});
        ev.add_frame(two, std::vector<Track>{hyp(0, {0, 0})});
        ev.add_frame(two, std::vector<Track>{hyp(0, {0, 0}), hyp(2, {10, 0})});
        ev.add_frame(two, std::vector<Track>{hyp(0, {0, 0}), hyp(2, {10, 0})});
        CHECK(ev.gt() == 10);
        CHECK(ev.fn() == 1);
        CHECK(ev.fp() == 1);
        CHECK(ev.idsw() == 1);
        CHECK(*mota(ev) == Rational{7, 10});
    }
    SUBCASE("swapped identities count one switch per object") {
        TrackingEvaluator ev(2.0);
        const auto two = gt_at({{0, 0}, {10, 0}});
        ev.add_frame(two, std::vector<Track>{hyp(0, {0, 0}), hyp(1, {10, 0})});
        CHECK(ev.add_frame(two, std::vector<Track>{hyp(1, {0, 0}), hyp(0, {10, 0})}) == 2);
        CHECK(*mota(ev) == Rational{1, 2});
    }
    SUBCASE("an unmatched gap does not by itself count a switch") {
        TrackingEvaluator ev(2.0);
        const auto one = gt_at({{0, 0}});
        ev.add_frame(one, std::vector<Track>{hyp(3, {0, 0})});
        ev.add_frame(one, std::vector<Track>{});
        CHECK(ev.add_frame(one, std::vector<Track>{hyp(3, {0, 0})}) == 0);
        CHECK(ev.add_frame(one, std::vector<Track>{hyp(4, {0, 0})}) == 1);
        CHECK(*mota(ev) == Rational{1, 2});
        CHECK(ev.last_matched().at(0) == 4);
    }
    SUBCASE("empty ground truth leaves MOTA undefined") {
        TrackingEvaluator ev(2.0);
        ev.add_frame(std::vector<GroundTruthObject>{}, std::vector<Track>{hyp(0, {1, 1})});
        CHECK(ev.fp() == 1);
        CHECK_FALSE(mota(ev));
    }
}

TEST_CASE("IDSW stays zero when each object keeps one id") {
    Rng g(77);
    TrackingEvaluator ev(1.0);
    for (int f = 0; f < 200; ++f) {
        std::vector<GroundTruthObject> gt;
        std::vector<Track> hs;
        for (std::int64_t oid = 0; oid < 5; ++oid) {
            const Vec2 p{10.0 * static_cast<double>(oid), static_cast<double>(f) * 0.1};
            if (g.uniform01() < 0.8) gt.push_back({oid, ObjectClass::car, p});
            if (g.uniform01() < 0.8) hs.push_back(hyp(100 + oid, p + Vec2{0.2, 0.0}));
        }
        ev.add_frame(gt, hs);
    }
    CHECK(ev.idsw() == 0);
    CHECK(*mota(ev) == Rational{1} - Rational{ev.fn() + ev.fp() + ev.idsw(), ev.gt()});
}

TEST_CASE("pairing statistics") {
    std::vector<AlignedTuple> benign(10);
    for (auto& t : benign) t.content_offsets = {0, 0};
    const auto h = pairing_stats(benign);
    CHECK(h.per_stream[0].at(0) == 10);
    CHECK(h.per_stream[1].at(0) == 10);
    CHECK(h.mean_abs_offset() == 0.0);

    std::vector<AlignedTuple> shifted(4);
    for (auto& t : shifted) t.content_offsets = {0, -5};
    const auto s = pairing_stats(shifted);
    CHECK(s.per_stream[1].at(-5) == 4);
    CHECK(s.total(1) == 4);
    CHECK(s.mean_abs_offset() == doctest::Approx(2.5));
    CHECK(pairing_stats(std::vector<AlignedTuple>{}).mean_abs_offset() == 0.0);
}

TEST_CASE("precision, recall and F1 bounds") {
    Rng g(12);
    for (int i = 0; i < 500; ++i) {
        DetectionTotals d{g.uniform_int(0, 5), g.uniform_int(0, 5), g.uniform_int(0, 5)};
        CHECK(d.precision() >= 0.0);
        CHECK(d.precision() <= 1.0);
        CHECK(d.recall() >= 0.0);
        CHECK(d.recall() <= 1.0);
        CHECK((d.f1() == 0.0) == (d.tp == 0));
    }
    DetectionTotals t{3, 1, 1};
    CHECK(t.precision() == doctest::Approx(0.75));
    CHECK(t.recall() == doctest::Approx(0.75));
    CHECK(t.f1() == doctest::Approx(0.75));
}
