#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "misalign/perception.hpp"
#include "misalign/synchronizer.hpp"
#include "misalign/time.hpp"

namespace misalign {

struct DetectionFrameResult {
    TimePoint t_sys;
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::vector<std::pair<std::int64_t, std::size_t>> matches;  // (oid, detection index)
    std::vector<std::int64_t> missed_oids;
    std::vector<std::size_t> false_detections;
};

/// Greedy center-distance matching of detections to ground truth.
DetectionFrameResult match_frame(std::span<const Vec2> detections, std::span<const GroundTruthObject> gt, double radius);

/// CLEAR-MOT counters accumulated over a run.
class TrackingEvaluator {
public:
    explicit TrackingEvaluator(double radius) : radius_(radius) {}

    /// Scores the tracker's confirmed hypotheses for one frame; returns the
    /// identity switches counted in this frame.
    std::int64_t add_frame(std::span<const GroundTruthObject> gt, std::span<const Track> hypotheses);

    std::int64_t fp() const { return fp_; }
    std::int64_t fn() const { return fn_; }
    std::int64_t idsw() const { return idsw_; }
    std::int64_t gt() const { return gt_; }
    std::int64_t matches() const { return matches_; }
    const std::map<std::int64_t, std::int64_t>& last_matched() const { return last_tid_; }

private:
    double radius_;
    std::map<std::int64_t, std::int64_t> last_tid_;
    std::int64_t fp_ = 0;
    std::int64_t fn_ = 0;
    std::int64_t idsw_ = 0;
    std::int64_t gt_ = 0;
    std::int64_t matches_ = 0;
};

/// 1 - (fn + fp + idsw) / gt; absent when gt == 0.
std::optional<Rational> mota(std::int64_t fn, std::int64_t fp, std::int64_t idsw, std::int64_t gt);
std::optional<Rational> mota(const TrackingEvaluator& state);

/// Content offsets per stream: offset in frames -> tuple count.
struct PairingHistogram {
    std::vector<std::map<std::int64_t, std::int64_t>> per_stream;

    std::int64_t total(std::size_t stream) const;
    double mean_abs_offset() const;
};

PairingHistogram pairing_stats(std::span<const AlignedTuple> tuples);

struct DetectionTotals {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;

    void add(const DetectionFrameResult& r);
    double precision() const;
    double recall() const;
    double f1() const;
};

struct FrameSeriesPoint {
    TimePoint t_sys;
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t idsw = 0;
};

struct ClassRecall {
    std::int64_t tp = 0;
    std::int64_t gt = 0;
};

struct MetricsReport {
    PairingHistogram pairing;
    double mean_abs_offset = 0.0;
    DetectionTotals detection;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t track_fp = 0;
    std::int64_t track_fn = 0;
    std::int64_t idsw = 0;
    std::int64_t track_gt = 0;
    std::optional<Rational> mota;
    std::vector<FrameSeriesPoint> series;
    /// Only classes the scene declares appear here.
    std::map<ObjectClass, ClassRecall> per_class;
};

}  // namespace misalign
