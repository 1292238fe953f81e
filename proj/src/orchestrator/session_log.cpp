#include "cobot/orchestrator/session_log.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

namespace cobot::orchestrator {

using nlohmann::json;

SessionLogWriter::SessionLogWriter(const std::filesystem::path& dir, const ComponentCatalog& catalog, bool append)
    : dir_(dir), catalog_(catalog) {
    std::filesystem::create_directories(dir_);
    log_.open(dir_ / kLogName, append ? std::ios::app : std::ios::trunc);
    if (!log_) throw std::runtime_error("cannot open session log in " + dir_.string());
}

void SessionLogWriter::append(const StepRecord& step) {
    log_ << to_json(step, catalog_).dump() << '\n';
    log_.flush();
    std::ofstream det(dir_ / ("det_" + std::to_string(step.t) + ".txt"), std::ios::trunc);
    det << detection::serialize_report(step.report, catalog_);
}

void SessionLogWriter::finish(const SessionResult& result) {
    std::ofstream(dir_ / kResultName, std::ios::trunc) << to_json(result).dump(2) << '\n';
}

StepRecord step_from_json(const json& j) {
    StepRecord s;
    s.t = j.at("t").get<int>();
    s.report = detection::report_from_json(j.at("detection"));
    s.detection_attempts = j.at("detection_attempts").get<int>();
    s.truth = j.at("truth").get<ComponentSet>();
    s.false_positives = j.at("false_positives").get<ComponentSet>();
    s.false_negatives = j.at("false_negatives").get<ComponentSet>();
    const auto& d = j.at("decision");
    if (!d.at("next").is_null()) s.decision.next = d.at("next").get<ComponentId>();
    s.decision.rationale = d.at("rationale").get<std::string>();
    s.decision.policy = d.at("policy").get<std::string>() == "llm" ? planner::Policy::Llm : planner::Policy::Reference;
    s.decision.overridden = d.at("overridden").get<bool>();
    s.bring = j.at("bring").get<ComponentSet>();
    if (!j.at("job").is_null())
        s.job = robot::JobReport{j["job"].at("completed_actions").get<int>(), j["job"].at("elapsed_s").get<double>()};
    if (!j.at("robot_error").is_null()) s.robot_error = j.at("robot_error").get<std::string>();
    const auto& e = j.at("event");
    const std::string kind = e.at("kind").get<std::string>();
    s.event.kind = kind == "assembled" ? sim::EventKind::Assembled
                   : kind == "rejected" ? sim::EventKind::Rejected
                                        : sim::EventKind::NoOp;
    if (!e.at("component").is_null()) s.event.component = e.at("component").get<ComponentId>();
    s.event.source = e.at("source").get<std::string>() == "magazine" ? sim::PartSource::Magazine : sim::PartSource::DeliveryZone;
    s.event.deviation = e.at("deviation").get<bool>();
    s.event.reason = e.at("reason").get<std::string>();
    s.belief = belief_from_json(j.at("belief"));
    s.llm_s = j.at("llm_s").get<double>();
    s.robot_s = j.at("robot_s").get<double>();
    s.human_s = j.at("human_s").get<double>();
    s.clock = j.at("clock").get<double>();
    s.world_after = world_from_json(j.at("world"));
    return s;
}

std::vector<StepRecord> read_session_log(const std::filesystem::path& dir) {
    std::ifstream in(dir / SessionLogWriter::kLogName);
    if (!in) throw std::runtime_error("no session log in " + dir.string());
    std::vector<StepRecord> steps;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error&) {
            if (in.peek() == std::char_traits<char>::eof()) break;  // torn final write
            throw std::runtime_error("corrupt session log line " + std::to_string(steps.size() + 1));
        }
        steps.push_back(step_from_json(j));
        if (steps.back().t != static_cast<int>(steps.size()))
            throw std::runtime_error("session log iterations are not contiguous at t=" + std::to_string(steps.back().t));
    }
    if (steps.empty()) throw std::runtime_error("session log in " + dir.string() + " is empty");
    return steps;
}

ResumePoint resume_point(const std::vector<StepRecord>& steps) {
    if (steps.empty()) throw std::invalid_argument("cannot resume without persisted iterations");
    ResumePoint rp;
    const auto& last = steps.back();
    rp.t = last.t;
    rp.belief = last.belief;
    rp.world = last.world_after;
    rp.prior = last.report;
    for (const auto& s : steps) {
        for (ComponentId id : s.false_positives) ++rp.fp_count[id];
        for (ComponentId id : s.false_negatives) ++rp.fn_count[id];
        rp.deliveries += static_cast<int>(s.bring.size());
        rp.overrides += s.decision.overridden ? 1 : 0;
        rp.llm_seconds += s.llm_s;
    }
    rp.steps = steps;
    return rp;
}

}  // namespace cobot::orchestrator
