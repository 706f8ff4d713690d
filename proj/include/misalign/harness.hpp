#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "misalign/metrics.hpp"
#include "misalign/scenario.hpp"

namespace misalign {

inline constexpr int kTraceSchemaVersion = 1;

enum class TraceKind { packet, tuple, detection, track, note };
std::string to_string(TraceKind k);

/// One line of the run trace: a kind tag plus flat fields.
struct TraceRecord {
    TraceKind kind = TraceKind::note;
    nlohmann::ordered_json fields = nlohmann::ordered_json::object();

    std::string to_line() const;
};

enum class EventKind { capture = 0, deliver = 1, forge_deliver = 2 };

/// Engine event; the ordering key (time, stream, seq, kind) is total.
struct Event {
    TimePoint time;
    std::uint32_t stream = 0;
    std::int64_t seq = 0;
    EventKind kind = EventKind::capture;
    SensorPacket packet;  // unused for captures

    friend bool operator<(const Event& a, const Event& b) {
        return std::tie(a.time, a.stream, a.seq, a.kind) < std::tie(b.time, b.stream, b.seq, b.kind);
    }
};

struct RunResult {
    std::vector<TraceRecord> trace;
    std::vector<AlignedTuple> tuples;
    MetricsReport report;
    AttackShape shape = AttackShape::benign;
};

/// Executes capture -> attack -> transmit -> synchronize -> fuse -> track ->
/// score up to the scenario horizon. Throws ScenarioError if the scenario
/// does not validate.
RunResult run(const Scenario& scenario);

void write_trace(std::ostream& out, const std::vector<TraceRecord>& trace);

inline constexpr const char* kReportHeader =
    "scenario,k_cam,k_lidar,delay_kind,mode,mean_abs_offset,precision,recall,f1,mota,idsw";

struct ReportRow {
    std::string scenario;
    std::int64_t k_cam = 0;
    std::int64_t k_lidar = 0;
    std::string delay_kind = "none";
    std::string mode = "benign";
    MetricsReport report;

    std::string to_csv() const;
};

ReportRow make_report_row(const Scenario& scenario, const RunResult& result);

enum class SweepTargets { camera, lidar, both };
std::optional<SweepTargets> parse_sweep_targets(const std::string& s);

struct SweepSpec {
    SweepTargets targets = SweepTargets::both;
    std::int64_t k_max = 5;
    DelayKind delay = DelayKind::constant;
};

/// The scenario a single sweep cell runs: the benign base with stale-content
/// attacks of the cell's delays on the swept streams.
Scenario sweep_cell(const Scenario& base, const SweepSpec& sweep, std::int64_t k_cam, std::int64_t k_lidar);

/// One run per grid cell, rows ordered by (k_cam, k_lidar). `jobs` > 1 runs
/// cells on worker threads; results do not depend on it.
std::vector<ReportRow> sweep(const Scenario& base, const SweepSpec& sweep, unsigned jobs = 1);

void write_report(std::ostream& out, const std::vector<ReportRow>& rows);

}  // namespace misalign
