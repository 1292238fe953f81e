#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cobot::eval {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// RFC 4180 quoting where a cell needs it; "\n" line endings.
    std::string to_csv() const;
    /// GitHub-flavoured pipe table.
    std::string to_markdown() const;
};

/// Output of one experiment run. Everything here is a pure function of the spec, so the
/// written files are byte-identical across runs.
struct ExperimentReport {
    std::string name;   // e1 | e2 | e3 | pr
    std::string title;
    std::vector<std::string> notes;
    std::string rows_title = "Sessions";
    Table rows;
    Table summary;
    nlohmann::json summary_json;

    std::string to_markdown() const;
    /// Writes <name>.csv, <name>_summary.csv, <name>.md and <name>_summary.json.
    void write(const std::filesystem::path& dir) const;
};

}  // namespace cobot::eval
