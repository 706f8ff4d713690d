#include "misalign/harness.hpp"

#include <atomic>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "misalign/rng.hpp"

namespace misalign {

std::string to_string(TraceKind k) {
    switch (k) {
        case TraceKind::packet: return "packet";
        case TraceKind::tuple: return "tuple";
        case TraceKind::detection: return "detection";
        case TraceKind::track: return "track";
        case TraceKind::note: return "note";
    }
    return "note";
}

std::string TraceRecord::to_line() const {
    nlohmann::ordered_json line = nlohmann::ordered_json::object();
    line["v"] = kTraceSchemaVersion;
    line["kind"] = to_string(kind);
    for (const auto& [key, value] : fields.items()) {
        line[key] = value;
    }
    return line.dump();
}

namespace {

constexpr std::uint64_t kClockSalt = 0xC10CCULL;
constexpr std::uint64_t kChannelSalt = 0xC4A77E1ULL;

nlohmann::ordered_json packet_fields(const SensorPacket& p) {
    return {{"stream", p.stream.index}, {"seq", p.seq},           {"frame", p.payload.frame},
            {"t_act_ns", p.t_act.ns},   {"t_pre_ns", p.t_pre.ns}, {"forged", p.forged}};
}

class Engine {
public:
    explicit Engine(const Scenario& sc)
        : sc_(sc),
          world_{sc.objects, sc.seed, sc.camera_sigma},
          adversary_(resolve_attacks(sc), timings(sc)),
          sync_(sc.sync, schedules(sc)),
          tracker_(sc.tracker),
          tracking_(sc.match_radius) {
        for (std::size_t i = 0; i < sc.streams.size(); ++i) {
            const auto& s = sc.streams[i];
            const StreamId id{static_cast<std::uint32_t>(i), s.modality};
            ids_.push_back(id);
            clocks_.emplace_back(ClockParams{s.clock_offset, s.clock_skew_ppm, s.clock_jitter,
                                             s.clock_seed.value_or(hash_seed({sc.seed, kClockSalt, i}))});
            channels_.emplace_back(ChannelParams{s.channel_latency, s.channel_jitter,
                                                 s.channel_seed.value_or(hash_seed({sc.seed, kChannelSalt, i})),
                                                 s.allow_reorder});
            sensors_.push_back(SensorModel{id, s.fov});
            if (s.modality == Modality::camera || s.modality == Modality::lidar) {
                coverage_.push_back(s.fov);
            }
        }
    }

    RunResult execute() {
        for (std::size_t i = 0; i < sc_.streams.size(); ++i) {
            const auto times = capture_schedule(sc_.streams[i].period, sc_.streams[i].phase, sc_.horizon);
            for (std::size_t seq = 0; seq < times.size(); ++seq) {
                schedule(Event{times[seq], static_cast<std::uint32_t>(i), static_cast<std::int64_t>(seq), EventKind::capture, {}});
            }
        }

        std::optional<Event> previous;
        while (!events_.empty()) {
            const Event ev = *events_.begin();
            events_.erase(events_.begin());
            if (previous && ev < *previous) {
                throw std::logic_error("engine: event scheduled in the past");
            }
            previous = ev;
            if (ev.kind == EventKind::capture) {
                on_capture(ev);
            } else {
                on_deliver(ev);
            }
        }
        return finish();
    }

private:
    static std::vector<StreamTiming> timings(const Scenario& sc) {
        std::vector<StreamTiming> out;
        for (std::size_t i = 0; i < sc.streams.size(); ++i) {
            out.push_back({StreamId{static_cast<std::uint32_t>(i), sc.streams[i].modality}, sc.streams[i].period});
        }
        return out;
    }

    static std::vector<StreamSchedule> schedules(const Scenario& sc) {
        std::vector<StreamSchedule> out;
        for (const auto& s : sc.streams) {
            out.push_back({s.period, s.phase});
        }
        return out;
    }

    void schedule(Event ev) {
        if (!events_.insert(std::move(ev)).second) {
            throw std::logic_error("engine: two events share one ordering key");
        }
    }

    void emit(TraceKind kind, nlohmann::ordered_json fields) {
        result_.trace.push_back(TraceRecord{kind, std::move(fields)});
    }

    void note(TimePoint t, const std::string& text) {
        emit(TraceKind::note, {{"t_ns", t.ns}, {"text", text}});
    }

    void on_capture(const Event& ev) {
        const std::uint32_t s = ev.stream;
        adversary_.before_stamp(s, ev.time, clocks_[s]);
        const SensorPacket genuine = stamp_and_publish(ids_[s], ev.seq, ev.time, clocks_[s]);
        CaptureOutcome out = adversary_.on_capture(genuine);
        for (const auto& n : out.notes) {
            note(ev.time, n);
        }
        auto fields = packet_fields(out.packet);
        fields["event"] = "capture";
        fields["genuine_t_pre_ns"] = genuine.t_pre.ns;
        emit(TraceKind::packet, std::move(fields));

        const TimePoint arrival = channels_[s].transmit(out.packet, ev.time);
        schedule(Event{arrival, s, out.packet.seq, out.packet.forged ? EventKind::forge_deliver : EventKind::deliver, out.packet});
    }

    void on_deliver(const Event& ev) {
        const SensorPacket& p = ev.packet;
        auto fields = packet_fields(p);
        fields["event"] = "deliver";
        fields["arrival_ns"] = ev.time.ns;
        emit(TraceKind::packet, std::move(fields));

        PushResult pushed = sync_.push(p, ev.time);
        for (const auto& n : pushed.notes) {
            note(ev.time, n);
        }
        for (std::size_t i = 0; i < pushed.tuples.size(); ++i) {
            on_tuple(pushed.tuples[i], i + 1 == pushed.tuples.size());
        }

        if (!p.forged) {
            if (auto forgery = adversary_.on_delivery(p, ev.time); forgery && forgery->deliver_at <= TimePoint{} + sc_.horizon) {
                schedule(Event{forgery->deliver_at, p.stream.index, forgery->packet.seq, EventKind::forge_deliver, forgery->packet});
            }
        }
    }

    void on_tuple(const AlignedTuple& tuple, bool feeds_tracker) {
        const TimePoint t = tuple.t_sys;
        result_.tuples.push_back(tuple);

        nlohmann::ordered_json tf = {{"t_sys_ns", t.ns}, {"pivot_ns", tuple.pivot.ns}, {"spread_ns", tuple.spread.ns}};
        std::vector<std::int64_t> seqs, frames, stamps, captured;
        std::vector<bool> forged;
        for (const auto& m : tuple.members) {
            seqs.push_back(m.seq);
            frames.push_back(m.payload.frame);
            stamps.push_back(m.t_pre.ns);
            captured.push_back(m.t_act.ns);
            forged.push_back(m.forged);
        }
        tf["seqs"] = seqs;
        tf["frames"] = frames;
        tf["t_pre_ns"] = stamps;
        tf["t_act_ns"] = captured;
        tf["forged"] = forged;
        tf["content_offsets"] = tuple.content_offsets;
        emit(TraceKind::tuple, std::move(tf));

        const PerceptionOutput out = fuse(tuple, world_, sensors_, sc_.fusion);
        const auto gt = ground_truth(world_, t, coverage_);
        std::vector<Vec2> positions;
        for (const auto& d : out.detections) {
            positions.push_back(d.position);
        }
        const DetectionFrameResult frame = match_frame(positions, gt, sc_.match_radius);
        detection_.add(frame);

        std::map<std::int64_t, std::size_t> matched_det;
        for (auto [oid, j] : frame.matches) {
            matched_det[oid] = j;
        }
        for (const auto& g : gt) {
            auto& c = result_.report.per_class[g.cls];
            ++c.gt;
            c.tp += matched_det.count(g.oid);
        }
        std::map<std::size_t, std::int64_t> det_oid;
        for (auto [oid, j] : frame.matches) {
            det_oid[j] = oid;
        }
        for (std::size_t j = 0; j < out.detections.size(); ++j) {
            const auto& d = out.detections[j];
            nlohmann::ordered_json df = {{"t_sys_ns", t.ns}, {"outcome", det_oid.count(j) ? "tp" : "fp"},
                                         {"x", d.position.x}, {"y", d.position.y},
                                         {"class", d.cls ? to_string(*d.cls) : "unknown"},
                                         {"streams", d.supporting_streams},
                                         {"oid", det_oid.count(j) ? det_oid[j] : -1},
                                         {"source_oid", d.source_oid}};
            emit(TraceKind::detection, std::move(df));
        }
        if (!frame.missed_oids.empty()) {
            const SensorPacket* cam = tuple.member(Modality::camera);
            const ModalitySnapshot cam_view = render_snapshot(world_, sensors_[cam->stream.index], cam->t_act);
            for (std::int64_t oid : frame.missed_oids) {
                const bool in_camera = std::any_of(cam_view.observations.begin(), cam_view.observations.end(),
                                                   [&](const Observation& o) { return o.oid == oid; });
                emit(TraceKind::detection, {{"t_sys_ns", t.ns}, {"outcome", "fn"}, {"oid", oid}, {"in_camera", in_camera}});
            }
        }

        FrameSeriesPoint point{t, frame.tp, frame.fp, frame.fn, 0};
        if (feeds_tracker) {
            if (last_track_t_ && t <= *last_track_t_) {
                note(t, "tracker skipped tuple with repeated t_sys");
            } else {
                last_track_t_ = t;
                tracker_.update(out.detections, t);
                const auto confirmed = tracker_.confirmed();
                point.idsw = tracking_.add_frame(gt, confirmed);
                for (const auto& tr : confirmed) {
                    emit(TraceKind::track, {{"t_sys_ns", t.ns}, {"tid", tr.tid}, {"x", tr.position.x}, {"y", tr.position.y},
                                            {"vx", tr.velocity.x}, {"vy", tr.velocity.y}, {"age", tr.age}});
                }
            }
        }
        result_.report.series.push_back(point);
    }

    RunResult finish() {
        MetricsReport& r = result_.report;
        r.pairing = pairing_stats(result_.tuples);
        r.mean_abs_offset = r.pairing.mean_abs_offset();
        r.detection = detection_;
        r.precision = detection_.precision();
        r.recall = detection_.recall();
        r.f1 = detection_.f1();
        r.track_fp = tracking_.fp();
        r.track_fn = tracking_.fn();
        r.idsw = tracking_.idsw();
        r.track_gt = tracking_.gt();
        r.mota = mota(tracking_);
        result_.shape = adversary_.shape();
        return std::move(result_);
    }

    const Scenario& sc_;
    World world_;
    Adversary adversary_;
    Synchronizer sync_;
    Tracker tracker_;
    TrackingEvaluator tracking_;
    std::vector<StreamId> ids_;
    std::vector<ClockModel> clocks_;
    std::vector<Channel> channels_;
    std::vector<SensorModel> sensors_;
    std::vector<FieldOfView> coverage_;
    std::set<Event> events_;
    DetectionTotals detection_;
    std::optional<TimePoint> last_track_t_;
    RunResult result_;
};

std::string fixed6(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(6) << v;
    return os.str();
}

}  // namespace

RunResult run(const Scenario& scenario) {
    if (auto errors = validate(scenario); !errors.empty()) {
        throw ScenarioError(std::move(errors));
    }
    return Engine(scenario).execute();
}

void write_trace(std::ostream& out, const std::vector<TraceRecord>& trace) {
    for (const auto& rec : trace) {
        out << rec.to_line() << '\n';
    }
}

std::string ReportRow::to_csv() const {
    std::ostringstream os;
    os << scenario << ',' << k_cam << ',' << k_lidar << ',' << delay_kind << ',' << mode << ','
       << fixed6(report.mean_abs_offset) << ',' << fixed6(report.precision) << ',' << fixed6(report.recall) << ','
       << fixed6(report.f1) << ',' << (report.mota ? fixed6(report.mota->to_double()) : std::string{}) << ','
       << report.idsw;
    return os.str();
}

ReportRow make_report_row(const Scenario& scenario, const RunResult& result) {
    ReportRow row;
    row.scenario = scenario.name;
    row.mode = to_string(result.shape);
    for (const auto& a : scenario.attacks) {
        if (row.delay_kind == "none") {
            row.delay_kind = to_string(a.delay.kind);
        }
        for (const auto& t : a.targets) {
            const auto idx = scenario.stream_index(t);
            if (!idx) continue;
            if (scenario.streams[*idx].modality == Modality::camera) row.k_cam = a.delay.k;
            if (scenario.streams[*idx].modality == Modality::lidar) row.k_lidar = a.delay.k;
        }
    }
    row.report = result.report;
    return row;
}

std::optional<SweepTargets> parse_sweep_targets(const std::string& s) {
    if (s == "camera") return SweepTargets::camera;
    if (s == "lidar") return SweepTargets::lidar;
    if (s == "both") return SweepTargets::both;
    return std::nullopt;
}

Scenario sweep_cell(const Scenario& base, const SweepSpec& spec, std::int64_t k_cam, std::int64_t k_lidar) {
    Scenario cell = base;
    cell.attacks.clear();
    for (std::size_t i = 0; i < base.streams.size(); ++i) {
        const Modality m = base.streams[i].modality;
        const bool swept = (m == Modality::camera && spec.targets != SweepTargets::lidar) ||
                           (m == Modality::lidar && spec.targets != SweepTargets::camera);
        if (!swept) continue;
        AttackConfig a;
        a.targets = {base.streams[i].name};
        a.capability = Capability::timestamp_forge;
        a.delay = DelayModel{spec.delay, m == Modality::camera ? k_cam : k_lidar};
        a.seed = hash_seed({base.seed, static_cast<std::uint64_t>(k_cam), static_cast<std::uint64_t>(k_lidar), i});
        cell.attacks.push_back(std::move(a));
    }
    return cell;
}

std::vector<ReportRow> sweep(const Scenario& base, const SweepSpec& spec, unsigned jobs) {
    if (!base.attacks.empty()) {
        throw std::invalid_argument("sweep: base scenario must be benign");
    }
    if (spec.k_max < 0) {
        throw std::invalid_argument("sweep: k_max must be >= 0");
    }
    std::vector<std::pair<std::int64_t, std::int64_t>> cells;
    for (std::int64_t kc = 0; kc <= spec.k_max; ++kc) {
        for (std::int64_t kl = 0; kl <= spec.k_max; ++kl) {
            const bool wanted = spec.targets == SweepTargets::both || (spec.targets == SweepTargets::camera && kl == 0) ||
                                (spec.targets == SweepTargets::lidar && kc == 0);
            if (wanted) cells.emplace_back(kc, kl);
        }
    }

    std::vector<ReportRow> rows(cells.size());
    auto run_cell = [&](std::size_t i) {
        const Scenario sc = sweep_cell(base, spec, cells[i].first, cells[i].second);
        rows[i] = make_report_row(sc, run(sc));
    };

    jobs = std::max(1u, jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    {
        std::vector<std::jthread> workers;
        for (unsigned w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < cells.size(); i = next++) {
                    try {
                        run_cell(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mu);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
    return rows;
}

void write_report(std::ostream& out, const std::vector<ReportRow>& rows) {
    out << kReportHeader << '\n';
    for (const auto& r : rows) {
        out << r.to_csv() << '\n';
    }
}

}  // namespace misalign
