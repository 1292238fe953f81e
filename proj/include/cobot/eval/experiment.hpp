#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cobot/eval/metrics.hpp"
#include "cobot/eval/report.hpp"
#include "cobot/orchestrator/scenario.hpp"

namespace cobot::eval {

enum class ExperimentKind { E1, E2, E3, Pr };
const char* to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

struct NamedScript {
    std::string name;
    std::vector<sim::ScriptEntry> script;
};

struct DetectorLog {
    std::string detector;
    std::filesystem::path path;
};

struct ExperimentSpec {
    ExperimentKind experiment = ExperimentKind::E1;
    /// e1: sessions; e2: runs per script; e3: sessions per group. Must be at least 1.
    int sessions = 1;
    /// Session i runs with seed + i.
    std::uint64_t seed = 0;
    /// Base scenario; the built-in defaults when empty.
    orchestrator::Scenario scenario = orchestrator::Scenario::defaults();
    /// Replaces the scenario's noise model.
    std::optional<detection::NoiseModel> noise;
    /// e2: deviation scripts; the three reference deviations when empty.
    std::vector<NamedScript> scripts;
    /// e3: time models of the guided and the unguided group.
    std::optional<sim::TimeModel> guided_time;
    sim::TimeModel manual_time;
    /// e3: parts the unguided operator assembles; the catalog size when empty.
    std::optional<int> manual_steps;
    /// pr: one log per detector, reported side by side.
    std::vector<DetectorLog> logs;
    /// Worker threads; 0 uses the hardware concurrency.
    int threads = 0;
    std::optional<std::filesystem::path> output_dir;

    /// Throws std::invalid_argument on a bad spec.
    void validate() const;
    /// Relative paths resolve against `base_dir`. Unknown fields are rejected.
    static ExperimentSpec from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
    static ExperimentSpec load(const std::filesystem::path& path);
};

/// One guided session as it appears in the e1/e2 tables.
struct SessionRow {
    int test = 0;
    std::string script;
    std::uint64_t seed = 0;
    bool success = false;
    orchestrator::Termination termination = orchestrator::Termination::Completed;
    int fp = 0;
    int fn = 0;
    /// "0" or e.g. "1×Tail Wing 2×Chassis".
    std::string fp_text;
    std::string fn_text;
    double total_seconds = 0.0;
    double average_llm_seconds = 0.0;
    int iterations = 0;
    int deliveries = 0;
    int rejected_attempts = 0;
    std::string order;
};

struct E1Result {
    std::vector<SessionRow> rows;
    double success_rate = 0.0;
    /// Over successful sessions only, as failed sessions have no completion time.
    Stats total_time;
    Stats llm_time;
};

struct E2Result {
    std::vector<SessionRow> rows;
    double success_rate = 0.0;
};

struct E3Result {
    std::vector<double> guided;
    std::vector<double> manual;
    Stats guided_stats;
    Stats manual_stats;
    /// 1 - guided mean / manual mean.
    double reduction = 0.0;
};

struct PrResult {
    std::vector<std::pair<std::string, MetricsSummary>> detectors;
};

E1Result run_experiment1(const ExperimentSpec& spec);
E2Result run_experiment2(const ExperimentSpec& spec);
E3Result run_experiment3(const ExperimentSpec& spec);
PrResult run_pr(const ExperimentSpec& spec);

ExperimentReport make_report(const ExperimentSpec& spec, const E1Result& r);
ExperimentReport make_report(const ExperimentSpec& spec, const E2Result& r);
ExperimentReport make_report(const ExperimentSpec& spec, const E3Result& r);
ExperimentReport make_report(const ExperimentSpec& spec, const PrResult& r);

/// Runs whichever experiment the spec names and renders its report.
ExperimentReport run_experiment(const ExperimentSpec& spec);

/// The deviations of the reference experiment: wheels at step 5; wing, chassis and wheels
/// at steps 5-7; wheels then wing at steps 5-6.
std::vector<NamedScript> reference_deviation_scripts();

}  // namespace cobot::eval
