#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cobot/detection/detection_log.hpp"

namespace cobot::eval {

/// Detection counts and derived ratios for one component of a detection log.
struct ComponentMetrics {
    std::string component;
    long tp = 0;
    long fp = 0;
    long fn = 0;
    long tn = 0;
    /// Undefined (empty) when TP + FP == 0.
    std::optional<double> precision;
    /// Undefined (empty) when TP + FN == 0.
    std::optional<double> recall;
};

struct MetricsSummary {
    /// One entry per component, in order of first appearance in the log.
    std::vector<ComponentMetrics> components;

    const ComponentMetrics& at(const std::string& component) const;
};

/// Per-component precision and recall. Throws detection::MalformedLogRow on a row without
/// a component name.
MetricsSummary compute_pr(const std::vector<detection::LogRow>& log);

struct Stats {
    double mean = 0.0;
    /// Sample standard deviation (n - 1); zero for fewer than two values.
    double stddev = 0.0;
    std::size_t n = 0;
};
Stats summarize(const std::vector<double>& values);

/// Fixed-point rendering; "N/A" for an undefined ratio.
std::string fixed(double value, int decimals);
std::string ratio(const std::optional<double>& value, int decimals = 2);

}  // namespace cobot::eval
