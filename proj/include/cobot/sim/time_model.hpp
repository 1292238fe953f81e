#pragma once

#include <random>

#include <nlohmann/json_fwd.hpp>

namespace cobot::sim {

/// Closed interval [lo, hi]; lo == hi is a constant.
struct Uniform {
    double lo = 0.0;
    double hi = 0.0;
    double mean() const { return (lo + hi) / 2.0; }
    bool operator==(const Uniform&) const = default;
};

/// Simulated durations in seconds. The defaults are calibration values for the reference
/// cell, not measurements.
struct TimeModel {
    Uniform llm_call_seconds{10.0, 19.0};
    double robot_cycle_seconds = 12.0;
    Uniform human_assemble_seconds{10.0, 20.0};
    /// Unguided operators look each next part up in the printed instructions.
    Uniform manual_lookup_seconds{15.0, 35.0};
    /// Unguided operators pick a wrong part with this probability per step and pay the
    /// rework penalty to disassemble and redo it.
    double manual_error_probability = 0.2;
    double manual_rework_seconds = 60.0;

    /// Throws std::invalid_argument on negative values, lo > hi, or a probability outside [0, 1].
    void validate() const;

    static TimeModel from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

enum class StepKind { LlmCall, RobotCycle, HumanAssemble, ManualLookup, ManualRework };

/// Draws one duration. ManualRework returns either 0 or the rework penalty. Exactly one
/// value is taken from `rng` per call, whatever the kind, so streams stay aligned.
double sample_step_time(const TimeModel& model, StepKind kind, std::mt19937_64& rng);

/// Total time of an unguided assembly of `steps` parts.
double simulate_manual_session(const TimeModel& model, int steps, std::mt19937_64& rng);

}  // namespace cobot::sim
