#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cobot/detection/detector.hpp"
#include "cobot/domain/belief.hpp"
#include "cobot/planner/actions.hpp"
#include "cobot/planner/planner.hpp"
#include "cobot/robot/link.hpp"
#include "cobot/sim/operator.hpp"
#include "cobot/sim/time_model.hpp"
#include "cobot/sim/world.hpp"

namespace cobot::orchestrator {

enum class Outcome { TP, FP, FN, TN };
const char* to_string(Outcome o);

/// Per-component comparison of one report with the physically assembled set.
std::map<ComponentId, Outcome> classify_detection(const detection::DetectionReport& report, const ComponentSet& truth);

enum class Termination { Completed, Deadlock, MaxIterations, BackendFailure };
const char* to_string(Termination t);
Termination termination_from_string(const std::string& s);

/// One loop iteration: detect, plan, deliver, let the operator act.
struct StepRecord {
    int t = 0;
    detection::DetectionReport report;
    int detection_attempts = 1;
    /// Ground truth when the images were taken.
    ComponentSet truth;
    ComponentSet false_positives;
    ComponentSet false_negatives;
    planner::PlanDecision decision;
    /// The component the robot was asked to bring (empty or one id).
    ComponentSet bring;
    std::optional<robot::JobReport> job;
    std::optional<std::string> robot_error;
    sim::OperatorEvent event;
    /// Belief after the brought/avail update of this iteration.
    BeliefState belief;
    double llm_s = 0.0;
    double robot_s = 0.0;
    double human_s = 0.0;
    /// Simulated clock at the end of the iteration.
    double clock = 0.0;
    sim::WorldState world_after;
};

nlohmann::json to_json(const StepRecord& step, const ComponentCatalog& catalog);

struct SessionResult {
    bool success = false;
    Termination termination = Termination::Completed;
    std::string detail;
    std::vector<StepRecord> steps;
    /// Operator turns after the loop ended (assembling what is left in the delivery zone).
    std::vector<sim::OperatorEvent> final_events;
    std::map<ComponentId, int> fp_count;
    std::map<ComponentId, int> fn_count;
    int iterations = 0;
    int deliveries = 0;
    int overrides = 0;
    double total_seconds = 0.0;
    double llm_seconds = 0.0;
    AssemblySequence realized_order;

    int total_fp() const;
    int total_fn() const;
    double average_llm_seconds() const { return iterations ? llm_seconds / iterations : 0.0; }
};

nlohmann::json to_json(const SessionResult& result);

enum class Progress { Progressing, Deadlock, Terminal };
const char* to_string(Progress p);

/// Terminal when the last belief has nothing left to bring; deadlock when each of the last
/// `window` iterations left det ∪ brought unchanged and the operator mounted nothing.
Progress detect_deadlock(const std::vector<StepRecord>& history, int window = 3);

/// Receives live session updates (used by the operator gateway).
class SessionObserver {
public:
    virtual ~SessionObserver() = default;
    virtual void on_awaiting_operator(const nlohmann::json& /*state*/) {}
    virtual void on_step(const StepRecord& /*step*/, const nlohmann::json& /*state*/) {}
    virtual void on_finished(const SessionResult& /*result*/, const nlohmann::json& /*state*/) {}
};

/// Where a persisted session left off.
struct ResumePoint {
    int t = 0;
    BeliefState belief;
    sim::WorldState world;
    std::optional<detection::DetectionReport> prior;
    std::map<ComponentId, int> fp_count;
    std::map<ComponentId, int> fn_count;
    int deliveries = 0;
    int overrides = 0;
    double llm_seconds = 0.0;
    std::vector<StepRecord> steps;
};

struct SessionConfig {
    const ComponentCatalog* catalog = nullptr;
    const planner::MagazineLayout* layout = nullptr;
    detection::Detector* detector = nullptr;
    planner::Planner* planner = nullptr;
    sim::Operator* op = nullptr;
    robot::RobotLink* robot = nullptr;
    std::shared_ptr<sim::WorldHandle> world;

    sim::TimeModel time;
    std::uint64_t seed = 0;
    int max_iterations = 20;
    int deadlock_window = 3;
    /// Extra detection attempts after a backend or parse failure.
    int backend_retries = 2;
    bool scene_images = true;
    /// Set when the robot runs in another process: successful jobs are replayed onto the
    /// local world (magazine -> delivery zone).
    bool mirror_robot_deliveries = false;
    std::optional<std::filesystem::path> log_dir;
    SessionObserver* observer = nullptr;
    std::optional<ResumePoint> resume;

    /// Throws std::invalid_argument on missing parts or max_iterations < catalog size.
    void validate() const;
};

/// Runs the detect/plan/deliver/operator loop until nothing is left to bring, then lets the
/// operator finish the delivery zone and judges success on the physical world alone.
/// Backend and robot failures end the session with a termination cause; they do not throw.
SessionResult run_session(const SessionConfig& config);

/// Snapshot of a running session as served by the gateway.
nlohmann::json session_state_json(const std::string& status, int t, const BeliefState& belief,
                                  const std::optional<ComponentId>& recommendation, const sim::WorldState& world);

nlohmann::json to_json(const BeliefState& belief);
BeliefState belief_from_json(const nlohmann::json& j);
nlohmann::json to_json(const sim::WorldState& world);
sim::WorldState world_from_json(const nlohmann::json& j);

}  // namespace cobot::orchestrator
