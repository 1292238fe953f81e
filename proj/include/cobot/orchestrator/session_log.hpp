#pragma once

#include <filesystem>
#include <fstream>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cobot/orchestrator/session.hpp"

namespace cobot::orchestrator {

/// Append-only session persistence: `session.ndjson` gets one JSON object per iteration,
/// `det_<t>.txt` mirrors each detection in the prompt's YES/NO text form, and `result.json`
/// is written once the session ends.
class SessionLogWriter {
public:
    SessionLogWriter(const std::filesystem::path& dir, const ComponentCatalog& catalog, bool append);
    void append(const StepRecord& step);
    void finish(const SessionResult& result);

    static constexpr const char* kLogName = "session.ndjson";
    static constexpr const char* kResultName = "result.json";

private:
    std::filesystem::path dir_;
    const ComponentCatalog& catalog_;
    std::ofstream log_;
};

StepRecord step_from_json(const nlohmann::json& j);

/// Reads `session.ndjson`; a torn last line (crash mid-write) is ignored. Throws
/// std::runtime_error when the log is missing, empty or has non-contiguous iterations.
std::vector<StepRecord> read_session_log(const std::filesystem::path& dir);

/// State to continue from the last persisted iteration.
ResumePoint resume_point(const std::vector<StepRecord>& steps);

}  // namespace cobot::orchestrator
