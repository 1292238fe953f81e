#include "cobot/eval/report.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cobot::eval {

namespace {

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string md_cell(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += '\\';
        out += c;
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

}  // namespace

std::string Table::to_csv() const {
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_cell(cells[i]);
        out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out.str();
}

std::string Table::to_markdown() const {
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
        out << '|';
        for (const auto& c : cells) out << ' ' << md_cell(c) << " |";
        out << '\n';
    };
    line(header);
    out << '|';
    for (std::size_t i = 0; i < header.size(); ++i) out << " --- |";
    out << '\n';
    for (const auto& r : rows) line(r);
    return out.str();
}

std::string ExperimentReport::to_markdown() const {
    std::ostringstream out;
    out << "# " << title << "\n\n";
    for (const auto& n : notes) out << "> " << n << "\n";
    if (!notes.empty()) out << '\n';
    out << "## Summary\n\n" << summary.to_markdown() << "\n## " << rows_title << "\n\n" << rows.to_markdown();
    return out.str();
}

void ExperimentReport::write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    write_file(dir / (name + ".csv"), rows.to_csv());
    write_file(dir / (name + "_summary.csv"), summary.to_csv());
    write_file(dir / (name + ".md"), to_markdown());
    write_file(dir / (name + "_summary.json"), summary_json.dump(2) + "\n");
}

}  // namespace cobot::eval
