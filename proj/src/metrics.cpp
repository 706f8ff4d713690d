#include "misalign/metrics.hpp"

#include <cstdlib>
#include <stdexcept>

namespace misalign {

DetectionFrameResult match_frame(std::span<const Vec2> detections, std::span<const GroundTruthObject> gt, double radius) {
    if (radius <= 0.0) {
        throw std::invalid_argument("match_frame: radius must be positive");
    }
    std::vector<Vec2> gp;
    std::vector<std::int64_t> gk;
    for (const auto& g : gt) {
        gp.push_back(g.position);
        gk.push_back(g.oid);
    }
    std::vector<std::int64_t> dk(detections.size());
    for (std::size_t j = 0; j < detections.size(); ++j) {
        dk[j] = static_cast<std::int64_t>(j);
    }
    const auto pairs = greedy_match(gp, gk, detections, dk, radius);

    DetectionFrameResult r;
    std::vector<bool> gt_hit(gt.size(), false);
    std::vector<bool> det_hit(detections.size(), false);
    for (auto [i, j] : pairs) {
        gt_hit[i] = true;
        det_hit[j] = true;
        r.matches.emplace_back(gt[i].oid, j);
    }
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (!gt_hit[i]) r.missed_oids.push_back(gt[i].oid);
    }
    for (std::size_t j = 0; j < detections.size(); ++j) {
        if (!det_hit[j]) r.false_detections.push_back(j);
    }
    r.tp = static_cast<std::int64_t>(pairs.size());
    r.fn = static_cast<std::int64_t>(r.missed_oids.size());
    r.fp = static_cast<std::int64_t>(r.false_detections.size());
    return r;
}

std::int64_t TrackingEvaluator::add_frame(std::span<const GroundTruthObject> gt, std::span<const Track> hypotheses) {
    std::vector<Vec2> gp, hp;
    std::vector<std::int64_t> gk, hk;
    for (const auto& g : gt) {
        gp.push_back(g.position);
        gk.push_back(g.oid);
    }
    for (const auto& h : hypotheses) {
        hp.push_back(h.position);
        hk.push_back(h.tid);
    }
    const auto pairs = greedy_match(gp, gk, hp, hk, radius_);

    std::int64_t switches = 0;
    for (auto [i, j] : pairs) {
        const std::int64_t oid = gk[i];
        const std::int64_t tid = hk[j];
        auto it = last_tid_.find(oid);
        if (it != last_tid_.end() && it->second != tid) {
            ++switches;
        }
        last_tid_[oid] = tid;
    }
    const auto n = static_cast<std::int64_t>(pairs.size());
    matches_ += n;
    gt_ += static_cast<std::int64_t>(gt.size());
    fn_ += static_cast<std::int64_t>(gt.size()) - n;
    fp_ += static_cast<std::int64_t>(hypotheses.size()) - n;
    idsw_ += switches;
    return switches;
}

std::optional<Rational> mota(std::int64_t fn, std::int64_t fp, std::int64_t idsw, std::int64_t gt) {
    if (gt <= 0) {
        return std::nullopt;
    }
    return Rational{1} - Rational{fn + fp + idsw, gt};
}

std::optional<Rational> mota(const TrackingEvaluator& state) {
    return mota(state.fn(), state.fp(), state.idsw(), state.gt());
}

std::int64_t PairingHistogram::total(std::size_t stream) const {
    std::int64_t n = 0;
    for (const auto& [offset, count] : per_stream.at(stream)) {
        n += count;
    }
    return n;
}

double PairingHistogram::mean_abs_offset() const {
    std::int64_t sum = 0;
    std::int64_t n = 0;
    for (const auto& hist : per_stream) {
        for (const auto& [offset, count] : hist) {
            sum += std::llabs(offset) * count;
            n += count;
        }
    }
    return n > 0 ? static_cast<double>(sum) / static_cast<double>(n) : 0.0;
}

PairingHistogram pairing_stats(std::span<const AlignedTuple> tuples) {
    PairingHistogram h;
    for (const auto& t : tuples) {
        if (h.per_stream.size() < t.content_offsets.size()) {
            h.per_stream.resize(t.content_offsets.size());
        }
        for (std::size_t s = 0; s < t.content_offsets.size(); ++s) {
            ++h.per_stream[s][t.content_offsets[s]];
        }
    }
    return h;
}

void DetectionTotals::add(const DetectionFrameResult& r) {
    tp += r.tp;
    fp += r.fp;
    fn += r.fn;
}

double DetectionTotals::precision() const {
    return tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
}

double DetectionTotals::recall() const {
    return tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
}

double DetectionTotals::f1() const {
    const double p = precision();
    const double r = recall();
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

}  // namespace misalign
