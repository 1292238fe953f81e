#pragma once

#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cobot::detection {

/// One row of an external detector log: `test_id,component,ground_truth,predicted`.
struct LogRow {
    std::string test_id;
    std::string component;
    bool ground_truth = false;
    bool predicted = false;
};

class MalformedLogRow : public std::runtime_error {
public:
    MalformedLogRow(std::size_t line, const std::string& what)
        : std::runtime_error("detection log line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Reads the CSV; the header row is required. Throws MalformedLogRow.
std::vector<LogRow> read_detection_log(std::istream& in);
std::vector<LogRow> read_detection_log(const std::filesystem::path& path);
void write_detection_log(std::ostream& out, const std::vector<LogRow>& rows);

}  // namespace cobot::detection
