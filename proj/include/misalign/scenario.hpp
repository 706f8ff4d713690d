#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "misalign/adversary.hpp"
#include "misalign/perception.hpp"
#include "misalign/pipeline.hpp"
#include "misalign/synchronizer.hpp"
#include "misalign/time.hpp"

namespace misalign {

struct StreamConfig {
    std::string name;
    Modality modality = Modality::other;
    Duration period{};
    Duration phase{};
    Duration clock_offset{};
    Rational clock_skew_ppm{};
    Duration clock_jitter{};
    std::optional<std::uint64_t> clock_seed;  // derived from the scenario seed when absent
    Duration channel_latency{};
    Duration channel_jitter{};
    std::optional<std::uint64_t> channel_seed;
    bool allow_reorder = false;
    FieldOfView fov;
};

struct AttackConfig {
    std::vector<std::string> targets;  // stream names
    Capability capability = Capability::timestamp_forge;
    DelayModel delay;
    Duration stamp_offset{};
    Rational skew_ppm{};
    Duration lead = Duration::millis(5);
    std::int64_t history_depth = 1;
    TimePoint start_time{};
    std::optional<std::uint64_t> seed;
};

struct Scenario {
    std::string name = "scenario";
    Duration horizon{};
    std::uint64_t seed = 0;
    std::vector<StreamConfig> streams;
    SyncPolicy sync;
    std::vector<AttackConfig> attacks;  // empty means benign
    std::vector<WorldObject> objects;
    double camera_sigma = 0.3;
    FusionParams fusion;
    TrackerParams tracker;
    double match_radius = 2.0;

    std::optional<std::size_t> stream_index(const std::string& name) const;
};

/// Every problem found in a scenario, each prefixed with the offending key.
class ScenarioError : public std::runtime_error {
public:
    explicit ScenarioError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

/// Parses a YAML scenario document. Throws ScenarioError listing every
/// malformed or missing field.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario_file(const std::string& path);

/// Semantic checks; returns an empty list when the scenario is runnable.
std::vector<std::string> validate(const Scenario& scenario);

/// Attack specs with stream names resolved and seeds filled in.
std::vector<AttackSpec> resolve_attacks(const Scenario& scenario);

}  // namespace misalign
