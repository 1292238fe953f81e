#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cobot/domain/catalog.hpp"

namespace cobot::detection {

enum class Verdict { Absent, Present };
enum class Source { Llm, Oracle, Replay, ExternalLog };

const char* to_string(Source s);
Source source_from_string(const std::string& s);

struct DetectionReport {
    std::map<ComponentId, Verdict> verdicts;
    Source source = Source::Oracle;
    std::optional<std::string> raw_text;
    double timestamp = 0.0;
    std::optional<int> prompt_tokens;

    ComponentSet present() const;
    bool operator==(const DetectionReport&) const = default;
};

DetectionReport make_report(const ComponentSet& present, const ComponentCatalog& catalog, Source source,
                            double timestamp = 0.0);

/// "<id> (<name>): YES|NO" per line, in id order. This is the assistant-example format the
/// response parser accepts back.
std::string serialize_report(const DetectionReport& report, const ComponentCatalog& catalog);

nlohmann::json to_json(const DetectionReport& report);
DetectionReport report_from_json(const nlohmann::json& j);

class DetectionError : public std::runtime_error {
public:
    enum class Kind { MissingComponentAnswer, AmbiguousAnswer, UnparseableResponse, EmptyCatalog, Backend };
    DetectionError(Kind kind, std::vector<ComponentId> ids, const std::string& what)
        : std::runtime_error(what), kind_(kind), ids_(std::move(ids)) {}
    Kind kind() const noexcept { return kind_; }
    const std::vector<ComponentId>& ids() const noexcept { return ids_; }

private:
    Kind kind_;
    std::vector<ComponentId> ids_;
};

}  // namespace cobot::detection
