#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "misalign/assignment.hpp"
#include "misalign/pipeline.hpp"
#include "misalign/synchronizer.hpp"
#include "misalign/time.hpp"

namespace misalign {

enum class ObjectClass { car, pedestrian, cyclist };

std::string to_string(ObjectClass c);
std::optional<ObjectClass> parse_object_class(const std::string& s);

struct Waypoint {
    TimePoint t;
    Vec2 position;
};

struct WorldObject {
    std::int64_t oid = 0;
    ObjectClass cls = ObjectClass::car;
    std::vector<Waypoint> waypoints;  // sorted by time, at least one
    double extent = 0.5;
    TimePoint spawn;
    TimePoint despawn;

    bool alive(TimePoint t) const { return t >= spawn && t <= despawn; }
    /// Linear interpolation between waypoints, held constant outside them.
    Vec2 position(TimePoint t) const;
};

/// Sensor coverage as a sector around the ego vehicle at the origin.
struct FieldOfView {
    double range = 1e9;
    double heading_deg = 0.0;
    double half_angle_deg = 180.0;

    bool contains(Vec2 p) const;
};

struct SensorModel {
    StreamId stream;
    FieldOfView fov;
};

struct World {
    std::vector<WorldObject> objects;
    std::uint64_t seed = 0;
    double camera_sigma = 0.3;  // lateral position noise of camera observations, meters
};

struct Observation {
    std::int64_t oid = 0;
    Vec2 position;
    std::optional<ObjectClass> cls;  // camera only
};

struct ModalitySnapshot {
    StreamId stream;
    TimePoint t_act;
    std::vector<Observation> observations;  // ascending oid
};

ModalitySnapshot render_snapshot(const World& world, const SensorModel& sensor, TimePoint t_act);

enum class FusionMode { lidar_dominant, camera_gated };

std::string to_string(FusionMode m);
std::optional<FusionMode> parse_fusion_mode(const std::string& s);

struct FusionParams {
    FusionMode mode = FusionMode::lidar_dominant;
    double gate = 2.0;
};

struct FusedDetection {
    Vec2 position;
    std::optional<ObjectClass> cls;
    std::vector<std::uint32_t> supporting_streams;
    std::int64_t source_oid = -1;  // oid behind the LiDAR observation; scoring bookkeeping only
};

std::vector<FusedDetection> fuse_snapshots(const ModalitySnapshot& camera, const ModalitySnapshot& lidar, const FusionParams& params);

struct Track {
    std::int64_t tid = 0;
    Vec2 position;
    Vec2 velocity;
    std::int64_t age = 0;
    std::int64_t miss_count = 0;
    TimePoint last_update;
};

struct PerceptionOutput {
    TimePoint t_sys;
    std::vector<FusedDetection> detections;
    std::vector<Track> tracks;  // tracks confirmed by a detection at t_sys
};

/// Renders the camera and LiDAR members of the tuple at their content
/// capture times and fuses them. Throws std::invalid_argument if either
/// modality is missing from the tuple or from `sensors`.
PerceptionOutput fuse(const AlignedTuple& tuple, const World& world, const std::vector<SensorModel>& sensors,
                      const FusionParams& params);

struct TrackerParams {
    double gate_track = 3.0;
    std::int64_t max_misses = 2;
};

/// Greedy nearest-neighbour tracker with constant-velocity prediction.
class Tracker {
public:
    explicit Tracker(TrackerParams params = {}) : params_(params) {}

    /// Throws std::invalid_argument unless t_sys is strictly after the previous update.
    const std::vector<Track>& update(const std::vector<FusedDetection>& detections, TimePoint t_sys);

    const std::vector<Track>& tracks() const { return tracks_; }
    std::vector<Track> confirmed() const;
    std::int64_t tracks_created() const { return next_tid_; }

private:
    TrackerParams params_;
    std::vector<Track> tracks_;
    std::int64_t next_tid_ = 0;
    std::optional<TimePoint> last_t_;
};

struct GroundTruthObject {
    std::int64_t oid = 0;
    ObjectClass cls = ObjectClass::car;
    Vec2 position;
};

/// Objects alive at t and inside every given field of view.
std::vector<GroundTruthObject> ground_truth(const World& world, TimePoint t, const std::vector<FieldOfView>& coverage);

}  // namespace misalign
