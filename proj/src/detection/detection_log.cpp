#include "cobot/detection/detection_log.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace cobot::detection {

namespace {

std::string trim(std::string s) {
    auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_flag(const std::string& s, std::size_t line, const char* column) {
    if (s == "1") return true;
    if (s == "0") return false;
    throw MalformedLogRow(line, std::string(column) + " must be 0 or 1, got '" + s + "'");
}

}  // namespace

std::vector<LogRow> read_detection_log(std::istream& in) {
    std::vector<LogRow> rows;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto cells = split(line);
        if (!header_seen) {
            const std::vector<std::string> expected{"test_id", "component", "ground_truth", "predicted"};
            if (cells != expected) throw MalformedLogRow(lineno, "expected header test_id,component,ground_truth,predicted");
            header_seen = true;
            continue;
        }
        if (cells.size() != 4) throw MalformedLogRow(lineno, "expected 4 columns, got " + std::to_string(cells.size()));
        if (cells[0].empty() || cells[1].empty()) throw MalformedLogRow(lineno, "empty test_id or component");
        rows.push_back({cells[0], cells[1], parse_flag(cells[2], lineno, "ground_truth"),
                        parse_flag(cells[3], lineno, "predicted")});
    }
    if (!header_seen) throw MalformedLogRow(lineno, "missing header");
    return rows;
}

std::vector<LogRow> read_detection_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open detection log " + path.string());
    return read_detection_log(in);
}

void write_detection_log(std::ostream& out, const std::vector<LogRow>& rows) {
    out << "test_id,component,ground_truth,predicted\n";
    for (const auto& r : rows)
        out << r.test_id << ',' << r.component << ',' << (r.ground_truth ? 1 : 0) << ',' << (r.predicted ? 1 : 0) << '\n';
}

}  // namespace cobot::detection
