#include "misalign/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "misalign/rng.hpp"

namespace misalign {

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
    std::string out = "invalid scenario:";
    for (const auto& e : errors) {
        out += "\n  " + e;
    }
    return out;
}

/// Typed lookups that record a message instead of throwing.
class Reader {
public:
    std::vector<std::string> errors;

    template <typename T>
    std::optional<T> scalar(const YAML::Node& parent, const std::string& key, const std::string& path, bool required) {
        const YAML::Node node = parent[key];
        if (!node) {
            if (required) {
                errors.push_back(path + ": missing");
            }
            return std::nullopt;
        }
        try {
            return node.as<T>();
        } catch (const YAML::Exception&) {
            errors.push_back(path + ": malformed value");
            return std::nullopt;
        }
    }

    template <typename T>
    void into(T& dst, const YAML::Node& parent, const std::string& key, const std::string& path, bool required = false) {
        if (auto v = scalar<T>(parent, key, path, required)) {
            dst = *v;
        }
    }

    void duration(Duration& dst, const YAML::Node& parent, const std::string& key, const std::string& path,
                  bool required = false) {
        if (auto v = scalar<std::int64_t>(parent, key, path, required)) {
            dst = Duration{*v};
        }
    }

    void rational(Rational& dst, const YAML::Node& parent, const std::string& key, const std::string& path) {
        if (auto v = scalar<std::string>(parent, key, path, false)) {
            try {
                dst = Rational::parse(*v);
            } catch (const std::invalid_argument&) {
                errors.push_back(path + ": not a rational number");
            }
        }
    }

    template <typename E>
    void enumeration(E& dst, const YAML::Node& parent, const std::string& key, const std::string& path,
                     std::optional<E> (*parse)(const std::string&), bool required = false) {
        if (auto v = scalar<std::string>(parent, key, path, required)) {
            if (auto e = parse(*v)) {
                dst = *e;
            } else {
                errors.push_back(path + ": unknown value '" + *v + "'");
            }
        }
    }
};

std::optional<SyncMode> parse_sync_mode(const std::string& s) {
    if (s == "exact") return SyncMode::exact;
    if (s == "approximate") return SyncMode::approximate;
    return std::nullopt;
}

StreamConfig read_stream(Reader& r, const YAML::Node& n, const std::string& path) {
    StreamConfig s;
    r.into(s.name, n, "name", path + ".name", true);
    r.enumeration(s.modality, n, "modality", path + ".modality", &parse_modality, true);
    r.duration(s.period, n, "period_ns", path + ".period_ns", true);
    r.duration(s.phase, n, "phase_ns", path + ".phase_ns");
    if (const YAML::Node c = n["clock"]) {
        r.duration(s.clock_offset, c, "offset_ns", path + ".clock.offset_ns");
        r.rational(s.clock_skew_ppm, c, "skew_ppm", path + ".clock.skew_ppm");
        r.duration(s.clock_jitter, c, "jitter_ns", path + ".clock.jitter_ns");
        s.clock_seed = r.scalar<std::uint64_t>(c, "seed", path + ".clock.seed", false);
    }
    if (const YAML::Node c = n["channel"]) {
        r.duration(s.channel_latency, c, "base_latency_ns", path + ".channel.base_latency_ns");
        r.duration(s.channel_jitter, c, "jitter_ns", path + ".channel.jitter_ns");
        s.channel_seed = r.scalar<std::uint64_t>(c, "seed", path + ".channel.seed", false);
        r.into(s.allow_reorder, c, "allow_reorder", path + ".channel.allow_reorder");
    }
    if (const YAML::Node f = n["fov"]) {
        r.into(s.fov.range, f, "range_m", path + ".fov.range_m");
        r.into(s.fov.heading_deg, f, "heading_deg", path + ".fov.heading_deg");
        r.into(s.fov.half_angle_deg, f, "half_angle_deg", path + ".fov.half_angle_deg");
    }
    return s;
}

AttackConfig read_attack(Reader& r, const YAML::Node& n, const std::string& path) {
    AttackConfig a;
    if (const YAML::Node t = n["targets"]; t && t.IsSequence()) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            try {
                a.targets.push_back(t[i].as<std::string>());
            } catch (const YAML::Exception&) {
                r.errors.push_back(path + ".targets[" + std::to_string(i) + "]: malformed value");
            }
        }
    } else {
        r.errors.push_back(path + ".targets: missing or not a list");
    }
    r.enumeration(a.capability, n, "capability", path + ".capability", &parse_capability, true);
    if (const YAML::Node d = n["delay"]) {
        r.enumeration(a.delay.kind, d, "kind", path + ".delay.kind", &parse_delay_kind);
        r.into(a.delay.k, d, "k", path + ".delay.k");
    }
    r.duration(a.stamp_offset, n, "stamp_offset_ns", path + ".stamp_offset_ns");
    r.rational(a.skew_ppm, n, "skew_ppm", path + ".skew_ppm");
    r.duration(a.lead, n, "lead_ns", path + ".lead_ns");
    r.into(a.history_depth, n, "history_depth", path + ".history_depth");
    if (auto v = r.scalar<std::int64_t>(n, "start_ns", path + ".start_ns", false)) {
        a.start_time = TimePoint{*v};
    }
    a.seed = r.scalar<std::uint64_t>(n, "seed", path + ".seed", false);
    return a;
}

WorldObject read_object(Reader& r, const YAML::Node& n, const std::string& path) {
    WorldObject o;
    r.into(o.oid, n, "oid", path + ".oid", true);
    r.enumeration(o.cls, n, "class", path + ".class", &parse_object_class, true);
    r.into(o.extent, n, "extent_m", path + ".extent_m");
    if (const YAML::Node w = n["waypoints"]; w && w.IsSequence()) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            const std::string wp = path + ".waypoints[" + std::to_string(i) + "]";
            auto t = r.scalar<std::int64_t>(w[i], "t_ns", wp + ".t_ns", true);
            auto x = r.scalar<double>(w[i], "x", wp + ".x", true);
            auto y = r.scalar<double>(w[i], "y", wp + ".y", true);
            if (t && x && y) {
                o.waypoints.push_back(Waypoint{TimePoint{*t}, Vec2{*x, *y}});
            }
        }
    } else {
        r.errors.push_back(path + ".waypoints: missing or not a list");
    }
    if (!o.waypoints.empty()) {
        o.spawn = o.waypoints.front().t;
        o.despawn = o.waypoints.back().t;
    }
    if (auto v = r.scalar<std::int64_t>(n, "spawn_ns", path + ".spawn_ns", false)) {
        o.spawn = TimePoint{*v};
    }
    if (auto v = r.scalar<std::int64_t>(n, "despawn_ns", path + ".despawn_ns", false)) {
        o.despawn = TimePoint{*v};
    }
    return o;
}

}  // namespace

std::optional<std::size_t> Scenario::stream_index(const std::string& stream_name) const {
    for (std::size_t i = 0; i < streams.size(); ++i) {
        if (streams[i].name == stream_name) {
            return i;
        }
    }
    return std::nullopt;
}

ScenarioError::ScenarioError(std::vector<std::string> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

Scenario parse_scenario(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ScenarioError({std::string("document: ") + e.what()});
    }
    if (!root.IsMap()) {
        throw ScenarioError({"document: expected a mapping at top level"});
    }

    Reader r;
    Scenario sc;
    r.into(sc.name, root, "name", "name");
    r.duration(sc.horizon, root, "horizon_ns", "horizon_ns", true);
    r.into(sc.seed, root, "seed", "seed");

    if (const YAML::Node streams = root["streams"]; streams && streams.IsSequence()) {
        for (std::size_t i = 0; i < streams.size(); ++i) {
            sc.streams.push_back(read_stream(r, streams[i], "streams[" + std::to_string(i) + "]"));
        }
    } else {
        r.errors.push_back("streams: missing or not a list");
    }

    if (const YAML::Node sync = root["sync"]) {
        r.enumeration(sc.sync.mode, sync, "mode", "sync.mode", &parse_sync_mode);
        r.duration(sc.sync.slop, sync, "slop_ns", "sync.slop_ns");
        std::int64_t queue = static_cast<std::int64_t>(sc.sync.queue_size);
        r.into(queue, sync, "queue_size", "sync.queue_size");
        if (queue < 1) {
            r.errors.push_back("sync.queue_size: must be >= 1");
        } else {
            sc.sync.queue_size = static_cast<std::size_t>(queue);
        }
    }

    if (const YAML::Node attack = root["attack"]; attack && !attack.IsNull()) {
        sc.attacks.push_back(read_attack(r, attack, "attack"));
    }
    if (const YAML::Node attacks = root["attacks"]; attacks && attacks.IsSequence()) {
        for (std::size_t i = 0; i < attacks.size(); ++i) {
            sc.attacks.push_back(read_attack(r, attacks[i], "attacks[" + std::to_string(i) + "]"));
        }
    }

    if (const YAML::Node world = root["world"]) {
        if (const YAML::Node objects = world["objects"]; objects && objects.IsSequence()) {
            for (std::size_t i = 0; i < objects.size(); ++i) {
                sc.objects.push_back(read_object(r, objects[i], "world.objects[" + std::to_string(i) + "]"));
            }
        }
    }

    if (const YAML::Node p = root["perception"]) {
        r.enumeration(sc.fusion.mode, p, "mode", "perception.mode", &parse_fusion_mode);
        r.into(sc.fusion.gate, p, "gate_m", "perception.gate_m");
        r.into(sc.tracker.gate_track, p, "gate_track_m", "perception.gate_track_m");
        r.into(sc.tracker.max_misses, p, "max_misses", "perception.max_misses");
        r.into(sc.camera_sigma, p, "camera_sigma_m", "perception.camera_sigma_m");
    }
    if (const YAML::Node m = root["metrics"]) {
        r.into(sc.match_radius, m, "radius_m", "metrics.radius_m");
    }

    if (!r.errors.empty()) {
        throw ScenarioError(std::move(r.errors));
    }
    return sc;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ScenarioError({"file: cannot open '" + path + "'"});
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::vector<std::string> validate(const Scenario& sc) {
    std::vector<std::string> errors;
    auto err = [&](const std::string& e) { errors.push_back(e); };

    if (sc.horizon.ns <= 0) err("horizon_ns: must be > 0");

    if (sc.streams.empty()) err("streams: at least one stream required");
    std::set<std::string> names;
    int cameras = 0;
    int lidars = 0;
    for (std::size_t i = 0; i < sc.streams.size(); ++i) {
        const auto& s = sc.streams[i];
        const std::string p = "streams[" + std::to_string(i) + "]";
        if (s.name.empty()) err(p + ".name: must not be empty");
        if (!names.insert(s.name).second) err(p + ".name: duplicate stream name '" + s.name + "'");
        if (s.period.ns <= 0) err(p + ".period_ns: must be > 0");
        if (s.phase.ns < 0 || (s.period.ns > 0 && s.phase >= s.period)) err(p + ".phase_ns: must lie in [0, period_ns)");
        if (s.clock_jitter.ns < 0) err(p + ".clock.jitter_ns: must be >= 0");
        if (s.channel_latency.ns < 0) err(p + ".channel.base_latency_ns: must be >= 0");
        if (s.channel_jitter.ns < 0) err(p + ".channel.jitter_ns: must be >= 0");
        if (s.clock_skew_ppm <= Rational{-1'000'000}) err(p + ".clock.skew_ppm: must be > -1000000");
        if (s.fov.range <= 0.0) err(p + ".fov.range_m: must be > 0");
        if (s.fov.half_angle_deg <= 0.0) err(p + ".fov.half_angle_deg: must be > 0");
        cameras += s.modality == Modality::camera ? 1 : 0;
        lidars += s.modality == Modality::lidar ? 1 : 0;
    }
    if (!sc.streams.empty() && (cameras != 1 || lidars != 1)) {
        err("streams: exactly one camera and one lidar stream required for fusion");
    }

    if (sc.sync.slop.ns < 0) err("sync.slop_ns: must be >= 0");
    if (sc.sync.queue_size < 1) err("sync.queue_size: must be >= 1");

    std::set<std::string> targeted;
    for (std::size_t a = 0; a < sc.attacks.size(); ++a) {
        const auto& at = sc.attacks[a];
        const std::string p = sc.attacks.size() == 1 ? std::string("attack") : "attacks[" + std::to_string(a) + "]";
        if (at.targets.empty()) err(p + ".targets: at least one target required");
        for (std::size_t t = 0; t < at.targets.size(); ++t) {
            const std::string tp = p + ".targets[" + std::to_string(t) + "]";
            if (!sc.stream_index(at.targets[t])) {
                err(tp + ": unknown stream '" + at.targets[t] + "'");
            } else if (!targeted.insert(at.targets[t]).second) {
                err(tp + ": stream '" + at.targets[t] + "' targeted more than once");
            }
        }
        if (at.delay.k < 0) err(p + ".delay.k: must be >= 0");
        if (at.capability == Capability::replay_impersonate) {
            if (at.lead.ns <= 0) err(p + ".lead_ns: must be > 0");
            if (at.history_depth < 1) err(p + ".history_depth: must be >= 1");
        }
        if (at.capability == Capability::clock_desync && at.delay.kind == DelayKind::uniform) {
            err(p + ".delay.kind: clock_desync injects a fixed offset, uniform delays are not expressible");
        }
    }

    std::set<std::int64_t> oids;
    for (std::size_t i = 0; i < sc.objects.size(); ++i) {
        const auto& o = sc.objects[i];
        const std::string p = "world.objects[" + std::to_string(i) + "]";
        if (!oids.insert(o.oid).second) err(p + ".oid: duplicate oid " + std::to_string(o.oid));
        if (o.waypoints.empty()) err(p + ".waypoints: at least one waypoint required");
        for (std::size_t w = 1; w < o.waypoints.size(); ++w) {
            if (o.waypoints[w].t <= o.waypoints[w - 1].t) {
                err(p + ".waypoints[" + std::to_string(w) + "].t_ns: waypoint times must strictly increase");
            }
        }
        if (o.despawn < o.spawn) err(p + ".despawn_ns: must not precede spawn");
        if (o.extent < 0.0) err(p + ".extent_m: must be >= 0");
    }

    if (sc.fusion.gate <= 0.0) err("perception.gate_m: must be > 0");
    if (sc.tracker.gate_track <= 0.0) err("perception.gate_track_m: must be > 0");
    if (sc.tracker.max_misses < 0) err("perception.max_misses: must be >= 0");
    if (sc.camera_sigma < 0.0) err("perception.camera_sigma_m: must be >= 0");
    if (sc.match_radius <= 0.0) err("metrics.radius_m: must be > 0");
    return errors;
}

std::vector<AttackSpec> resolve_attacks(const Scenario& sc) {
    std::vector<AttackSpec> out;
    for (std::size_t a = 0; a < sc.attacks.size(); ++a) {
        const auto& cfg = sc.attacks[a];
        AttackSpec spec;
        for (const auto& name : cfg.targets) {
            if (auto idx = sc.stream_index(name)) {
                spec.targets.push_back(StreamId{static_cast<std::uint32_t>(*idx), sc.streams[*idx].modality});
            }
        }
        spec.capability = cfg.capability;
        spec.delay = cfg.delay;
        spec.stamp_offset = cfg.stamp_offset;
        spec.skew_ppm = cfg.skew_ppm;
        spec.lead = cfg.lead;
        spec.history_depth = cfg.history_depth;
        spec.start_time = cfg.start_time;
        spec.seed = cfg.seed.value_or(hash_seed({sc.seed, 0xA77ACCULL, a}));
        out.push_back(std::move(spec));
    }
    return out;
}

}  // namespace misalign
