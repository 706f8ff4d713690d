#include "misalign/perception.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "misalign/rng.hpp"

namespace misalign {

std::string to_string(ObjectClass c) {
    switch (c) {
        case ObjectClass::car: return "car";
        case ObjectClass::pedestrian: return "pedestrian";
        case ObjectClass::cyclist: return "cyclist";
    }
    return "car";
}

std::optional<ObjectClass> parse_object_class(const std::string& s) {
    if (s == "car") return ObjectClass::car;
    if (s == "pedestrian") return ObjectClass::pedestrian;
    if (s == "cyclist") return ObjectClass::cyclist;
    return std::nullopt;
}

std::string to_string(FusionMode m) { return m == FusionMode::lidar_dominant ? "lidar_dominant" : "camera_gated"; }

std::optional<FusionMode> parse_fusion_mode(const std::string& s) {
    if (s == "lidar_dominant") return FusionMode::lidar_dominant;
    if (s == "camera_gated") return FusionMode::camera_gated;
    return std::nullopt;
}

Vec2 WorldObject::position(TimePoint t) const {
    if (waypoints.empty()) {
        return {};
    }
    if (t <= waypoints.front().t) {
        return waypoints.front().position;
    }
    if (t >= waypoints.back().t) {
        return waypoints.back().position;
    }
    auto next = std::upper_bound(waypoints.begin(), waypoints.end(), t,
                                 [](TimePoint v, const Waypoint& w) { return v < w.t; });
    const Waypoint& b = *next;
    const Waypoint& a = *(next - 1);
    const double span = static_cast<double>((b.t - a.t).ns);
    const double frac = span > 0.0 ? static_cast<double>((t - a.t).ns) / span : 0.0;
    return a.position + (b.position - a.position) * frac;
}

bool FieldOfView::contains(Vec2 p) const {
    if (p.norm() > range) {
        return false;
    }
    if (half_angle_deg >= 180.0) {
        return true;
    }
    const double bearing = std::atan2(p.y, p.x) * 180.0 / std::numbers::pi;
    double diff = std::fmod(bearing - heading_deg, 360.0);
    if (diff > 180.0) diff -= 360.0;
    if (diff < -180.0) diff += 360.0;
    return std::abs(diff) <= half_angle_deg;
}

ModalitySnapshot render_snapshot(const World& world, const SensorModel& sensor, TimePoint t_act) {
    ModalitySnapshot snap{sensor.stream, t_act, {}};
    for (const auto& obj : world.objects) {
        if (!obj.alive(t_act)) {
            continue;
        }
        const Vec2 truth = obj.position(t_act);
        if (!sensor.fov.contains(truth)) {
            continue;
        }
        Observation o{obj.oid, truth, std::nullopt};
        if (sensor.stream.modality == Modality::camera) {
            o.cls = obj.cls;
            Rng rng(hash_seed({world.seed, sensor.stream.index, static_cast<std::uint64_t>(obj.oid),
                               static_cast<std::uint64_t>(t_act.ns)}));
            const double lateral = rng.truncated_normal(world.camera_sigma);
            const double r = truth.norm();
            const Vec2 across = r > 0.0 ? Vec2{-truth.y / r, truth.x / r} : Vec2{0.0, 1.0};
            o.position = truth + across * lateral;
        }
        snap.observations.push_back(o);
    }
    std::sort(snap.observations.begin(), snap.observations.end(),
              [](const Observation& a, const Observation& b) { return a.oid < b.oid; });
    return snap;
}

std::vector<FusedDetection> fuse_snapshots(const ModalitySnapshot& camera, const ModalitySnapshot& lidar, const FusionParams& params) {
    std::vector<Vec2> lp, cp;
    std::vector<std::int64_t> lk, ck;
    for (const auto& o : lidar.observations) {
        lp.push_back(o.position);
        lk.push_back(o.oid);
    }
    for (const auto& o : camera.observations) {
        cp.push_back(o.position);
        ck.push_back(o.oid);
    }
    const auto pairs = greedy_match(lp, lk, cp, ck, params.gate);
    std::vector<std::optional<std::size_t>> partner(lp.size());
    for (auto [i, j] : pairs) {
        partner[i] = j;
    }

    std::vector<FusedDetection> out;
    for (std::size_t i = 0; i < lp.size(); ++i) {
        if (params.mode == FusionMode::camera_gated && !partner[i]) {
            continue;
        }
        FusedDetection d;
        d.position = lp[i];
        d.source_oid = lk[i];
        d.supporting_streams.push_back(lidar.stream.index);
        if (partner[i]) {
            d.cls = camera.observations[*partner[i]].cls;
            d.supporting_streams.push_back(camera.stream.index);
            std::sort(d.supporting_streams.begin(), d.supporting_streams.end());
        }
        out.push_back(std::move(d));
    }
    return out;
}

PerceptionOutput fuse(const AlignedTuple& tuple, const World& world, const std::vector<SensorModel>& sensors,
                      const FusionParams& params) {
    const SensorPacket* cam = tuple.member(Modality::camera);
    const SensorPacket* lid = tuple.member(Modality::lidar);
    if (cam == nullptr || lid == nullptr) {
        throw std::invalid_argument("fuse: tuple needs one camera and one lidar member");
    }
    auto sensor_for = [&](const SensorPacket& p) -> const SensorModel& {
        for (const auto& s : sensors) {
            if (s.stream.index == p.stream.index) {
                return s;
            }
        }
        throw std::invalid_argument("fuse: no sensor model for stream " + std::to_string(p.stream.index));
    };
    const ModalitySnapshot cs = render_snapshot(world, sensor_for(*cam), cam->t_act);
    const ModalitySnapshot ls = render_snapshot(world, sensor_for(*lid), lid->t_act);
    return PerceptionOutput{tuple.t_sys, fuse_snapshots(cs, ls, params), {}};
}

const std::vector<Track>& Tracker::update(const std::vector<FusedDetection>& detections, TimePoint t_sys) {
    if (last_t_ && t_sys <= *last_t_) {
        throw std::invalid_argument("Tracker::update: t_sys must strictly increase");
    }
    last_t_ = t_sys;

    std::vector<Vec2> predicted, det_pos;
    std::vector<std::int64_t> tids, det_keys;
    for (const auto& tr : tracks_) {
        const double dt = (t_sys - tr.last_update).to_seconds();
        predicted.push_back(tr.position + tr.velocity * dt);
        tids.push_back(tr.tid);
    }
    for (std::size_t j = 0; j < detections.size(); ++j) {
        det_pos.push_back(detections[j].position);
        det_keys.push_back(static_cast<std::int64_t>(j));
    }
    const auto pairs = greedy_match(predicted, tids, det_pos, det_keys, params_.gate_track);

    std::vector<bool> track_hit(tracks_.size(), false);
    std::vector<bool> det_used(detections.size(), false);
    for (auto [i, j] : pairs) {
        Track& tr = tracks_[i];
        const double dt = (t_sys - tr.last_update).to_seconds();
        tr.velocity = (det_pos[j] - tr.position) * (1.0 / dt);
        tr.position = det_pos[j];
        tr.last_update = t_sys;
        tr.miss_count = 0;
        ++tr.age;
        track_hit[i] = true;
        det_used[j] = true;
    }
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
        if (!track_hit[i]) {
            ++tracks_[i].miss_count;
            ++tracks_[i].age;
        }
    }
    std::erase_if(tracks_, [&](const Track& tr) { return tr.miss_count > params_.max_misses; });
    for (std::size_t j = 0; j < detections.size(); ++j) {
        if (!det_used[j]) {
            tracks_.push_back(Track{next_tid_++, det_pos[j], Vec2{}, 1, 0, t_sys});
        }
    }
    return tracks_;
}

std::vector<Track> Tracker::confirmed() const {
    std::vector<Track> out;
    for (const auto& tr : tracks_) {
        if (tr.miss_count == 0) {
            out.push_back(tr);
        }
    }
    return out;
}

std::vector<GroundTruthObject> ground_truth(const World& world, TimePoint t, const std::vector<FieldOfView>& coverage) {
    std::vector<GroundTruthObject> out;
    for (const auto& obj : world.objects) {
        if (!obj.alive(t)) {
            continue;
        }
        const Vec2 p = obj.position(t);
        const bool seen = std::all_of(coverage.begin(), coverage.end(), [&](const FieldOfView& f) { return f.contains(p); });
        if (seen) {
            out.push_back({obj.oid, obj.cls, p});
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.oid < b.oid; });
    return out;
}

}  // namespace misalign
