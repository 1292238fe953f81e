#include "cobot/sim/time_model.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

namespace cobot::sim {

namespace {

void check(const Uniform& u, const char* name) {
    if (u.lo < 0 || u.hi < u.lo) throw std::invalid_argument(std::string("invalid interval for ") + name);
}

Uniform uniform_from_json(const nlohmann::json& j, const char* key, Uniform fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (v.is_number()) return {v.get<double>(), v.get<double>()};
    if (!v.is_array() || v.size() != 2) throw std::invalid_argument(std::string(key) + " must be [lo, hi] or a number");
    return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

void TimeModel::validate() const {
    check(llm_call_seconds, "llm_call_seconds");
    check(human_assemble_seconds, "human_assemble_seconds");
    check(manual_lookup_seconds, "manual_lookup_seconds");
    if (robot_cycle_seconds < 0) throw std::invalid_argument("robot_cycle_seconds must be non-negative");
    if (manual_rework_seconds < 0) throw std::invalid_argument("manual_rework_seconds must be non-negative");
    if (manual_error_probability < 0 || manual_error_probability > 1)
        throw std::invalid_argument("manual_error_probability must be in [0, 1]");
}

TimeModel TimeModel::from_json(const nlohmann::json& j) {
    TimeModel m;
    m.llm_call_seconds = uniform_from_json(j, "llm_call_seconds", m.llm_call_seconds);
    m.human_assemble_seconds = uniform_from_json(j, "human_assemble_seconds", m.human_assemble_seconds);
    m.manual_lookup_seconds = uniform_from_json(j, "manual_lookup_seconds", m.manual_lookup_seconds);
    m.robot_cycle_seconds = j.value("robot_cycle_seconds", m.robot_cycle_seconds);
    m.manual_error_probability = j.value("manual_error_probability", m.manual_error_probability);
    m.manual_rework_seconds = j.value("manual_rework_seconds", m.manual_rework_seconds);
    m.validate();
    return m;
}

nlohmann::json TimeModel::to_json() const {
    return {{"llm_call_seconds", {llm_call_seconds.lo, llm_call_seconds.hi}},
            {"robot_cycle_seconds", robot_cycle_seconds},
            {"human_assemble_seconds", {human_assemble_seconds.lo, human_assemble_seconds.hi}},
            {"manual_lookup_seconds", {manual_lookup_seconds.lo, manual_lookup_seconds.hi}},
            {"manual_error_probability", manual_error_probability},
            {"manual_rework_seconds", manual_rework_seconds}};
}

double sample_step_time(const TimeModel& model, StepKind kind, std::mt19937_64& rng) {
    const double u = std::generate_canonical<double, 53>(rng);
    auto draw = [u](const Uniform& d) { return d.lo + (d.hi - d.lo) * u; };
    switch (kind) {
        case StepKind::LlmCall: return draw(model.llm_call_seconds);
        case StepKind::RobotCycle: return model.robot_cycle_seconds;
        case StepKind::HumanAssemble: return draw(model.human_assemble_seconds);
        case StepKind::ManualLookup: return draw(model.manual_lookup_seconds);
        case StepKind::ManualRework: return u < model.manual_error_probability ? model.manual_rework_seconds : 0.0;
    }
    return 0.0;
}

double simulate_manual_session(const TimeModel& model, int steps, std::mt19937_64& rng) {
    double total = 0.0;
    for (int i = 0; i < steps; ++i) {
        total += sample_step_time(model, StepKind::ManualLookup, rng);
        total += sample_step_time(model, StepKind::HumanAssemble, rng);
        total += sample_step_time(model, StepKind::ManualRework, rng);
    }
    return total;
}

}  // namespace cobot::sim
