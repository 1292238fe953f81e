#include "cobot/eval/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace cobot::eval {

const ComponentMetrics& MetricsSummary::at(const std::string& component) const {
    for (const auto& c : components)
        if (c.component == component) return c;
    throw std::out_of_range("no metrics for component '" + component + "'");
}

MetricsSummary compute_pr(const std::vector<detection::LogRow>& log) {
    MetricsSummary out;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < log.size(); ++i) {
        const auto& row = log[i];
        if (row.component.empty()) throw detection::MalformedLogRow(i + 2, "empty component");
        auto [it, inserted] = index.try_emplace(row.component, out.components.size());
        if (inserted) {
            ComponentMetrics m;
            m.component = row.component;
            out.components.push_back(std::move(m));
        }
        auto& m = out.components[it->second];
        if (row.ground_truth && row.predicted) {
            ++m.tp;
        } else if (!row.ground_truth && row.predicted) {
            ++m.fp;
        } else if (row.ground_truth) {
            ++m.fn;
        } else {
            ++m.tn;
        }
    }
    for (auto& m : out.components) {
        if (m.tp + m.fp > 0) m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
        if (m.tp + m.fn > 0) m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    }
    return out;
}

Stats summarize(const std::vector<double>& values) {
    Stats s;
    s.n = values.size();
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double sq = 0.0;
        for (double v : values) sq += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(sq / static_cast<double>(s.n - 1));
    }
    return s;
}

std::string fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    std::string s = buf;
    if (s == "-0" || s.rfind("-0.", 0) == 0) {
        // Avoid printing a negative zero after rounding.
        bool zero = true;
        for (char c : s.substr(1))
            if (c != '0' && c != '.') zero = false;
        if (zero) s = s.substr(1);
    }
    return s;
}

std::string ratio(const std::optional<double>& value, int decimals) { return value ? fixed(*value, decimals) : "N/A"; }

}  // namespace cobot::eval
