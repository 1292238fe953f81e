#include "cobot/detection/report.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

namespace cobot::detection {

const char* to_string(Source s) {
    switch (s) {
        case Source::Llm: return "llm";
        case Source::Oracle: return "oracle";
        case Source::Replay: return "replay";
        case Source::ExternalLog: return "external-log";
    }
    return "?";
}

Source source_from_string(const std::string& s) {
    if (s == "llm") return Source::Llm;
    if (s == "oracle") return Source::Oracle;
    if (s == "replay") return Source::Replay;
    if (s == "external-log") return Source::ExternalLog;
    throw std::invalid_argument("unknown detection source '" + s + "'");
}

ComponentSet DetectionReport::present() const {
    ComponentSet out;
    for (auto [id, v] : verdicts)
        if (v == Verdict::Present) out.insert(out.end(), id);
    return out;
}

DetectionReport make_report(const ComponentSet& present, const ComponentCatalog& catalog, Source source,
                            double timestamp) {
    DetectionReport r;
    r.source = source;
    r.timestamp = timestamp;
    for (const auto& c : catalog.components()) r.verdicts[c.id] = present.count(c.id) ? Verdict::Present : Verdict::Absent;
    return r;
}

std::string serialize_report(const DetectionReport& report, const ComponentCatalog& catalog) {
    std::ostringstream out;
    bool first = true;
    for (auto [id, v] : report.verdicts) {
        if (!first) out << '\n';
        first = false;
        out << id << " (" << catalog.at(id).name << "): " << (v == Verdict::Present ? "YES" : "NO");
    }
    return out.str();
}

nlohmann::json to_json(const DetectionReport& report) {
    nlohmann::json present = nlohmann::json::array();
    nlohmann::json absent = nlohmann::json::array();
    for (auto [id, v] : report.verdicts) (v == Verdict::Present ? present : absent).push_back(id);
    nlohmann::json j{{"present", present}, {"absent", absent}, {"source", to_string(report.source)},
                     {"timestamp", report.timestamp}};
    if (report.raw_text) j["raw_text"] = *report.raw_text;
    if (report.prompt_tokens) j["prompt_tokens"] = *report.prompt_tokens;
    return j;
}

DetectionReport report_from_json(const nlohmann::json& j) {
    DetectionReport r;
    for (int id : j.at("present")) r.verdicts[id] = Verdict::Present;
    for (int id : j.at("absent")) r.verdicts[id] = Verdict::Absent;
    r.source = source_from_string(j.at("source").get<std::string>());
    r.timestamp = j.value("timestamp", 0.0);
    if (j.contains("raw_text")) r.raw_text = j["raw_text"].get<std::string>();
    if (j.contains("prompt_tokens")) r.prompt_tokens = j["prompt_tokens"].get<int>();
    return r;
}

}  // namespace cobot::detection
