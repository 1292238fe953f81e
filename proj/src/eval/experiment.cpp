#include "cobot/eval/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <fstream>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace cobot::eval {

using json = nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path.string());
    return json::parse(in);
}

/// Runs fn(i) for i in [0, n) on a small pool. Each index writes only its own slot, so
/// the result does not depend on scheduling. The first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn fn) {
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::string display_name(const std::string& name) {
    std::string out = name;
    bool start = true;
    for (char& c : out) {
        if (start && std::isalpha(static_cast<unsigned char>(c))) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        start = c == ' ' || c == '-';
    }
    return out;
}

std::string count_text(const std::map<ComponentId, int>& counts, const ComponentCatalog& catalog) {
    std::string out;
    for (const auto& [id, n] : counts) {
        if (n == 0) continue;
        if (!out.empty()) out += ' ';
        out += std::to_string(n) + "×" + display_name(catalog.at(id).name);
    }
    return out.empty() ? "0" : out;
}

SessionRow run_one(const orchestrator::Scenario& scenario, int test, const std::string& script) {
    orchestrator::SessionRig rig(scenario);
    const auto r = orchestrator::run_session(rig.config());
    SessionRow row;
    row.test = test;
    row.script = script;
    row.seed = scenario.seed;
    row.success = r.success;
    row.termination = r.termination;
    row.fp = r.total_fp();
    row.fn = r.total_fn();
    row.fp_text = count_text(r.fp_count, rig.catalog());
    row.fn_text = count_text(r.fn_count, rig.catalog());
    row.total_seconds = r.total_seconds;
    row.average_llm_seconds = r.average_llm_seconds();
    row.iterations = r.iterations;
    row.deliveries = r.deliveries;
    for (const auto& s : r.steps) row.rejected_attempts += s.event.kind == sim::EventKind::Rejected;
    for (const auto& e : r.final_events) row.rejected_attempts += e.kind == sim::EventKind::Rejected;
    row.order = format_sequence(r.realized_order);
    return row;
}

orchestrator::Scenario base_scenario(const ExperimentSpec& spec) {
    auto s = spec.scenario;
    if (spec.noise) s.noise = *spec.noise;
    return s;
}

double success_rate(const std::vector<SessionRow>& rows) {
    if (rows.empty()) return 0.0;
    const auto ok = std::count_if(rows.begin(), rows.end(), [](const SessionRow& r) { return r.success; });
    return static_cast<double>(ok) / static_cast<double>(rows.size());
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

}  // namespace

const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::E1: return "e1";
        case ExperimentKind::E2: return "e2";
        case ExperimentKind::E3: return "e3";
        case ExperimentKind::Pr: return "pr";
    }
    return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "e1") return ExperimentKind::E1;
    if (s == "e2") return ExperimentKind::E2;
    if (s == "e3") return ExperimentKind::E3;
    if (s == "pr") return ExperimentKind::Pr;
    throw std::invalid_argument("unknown experiment '" + s + "' (expected e1, e2, e3 or pr)");
}

std::vector<NamedScript> reference_deviation_scripts() {
    return {{"test 1", {{5, 8}}}, {"test 2", {{5, 6}, {6, 7}, {7, 8}}}, {"test 3", {{5, 8}, {6, 6}}}};
}

void ExperimentSpec::validate() const {
    if (sessions < 1) throw std::invalid_argument("sessions must be at least 1");
    if (threads < 0) throw std::invalid_argument("threads must be non-negative");
    if (noise) noise->validate();
    manual_time.validate();
    if (guided_time) guided_time->validate();
    if (manual_steps && *manual_steps < 1) throw std::invalid_argument("manual_steps must be at least 1");
    if (experiment == ExperimentKind::Pr && logs.empty()) throw std::invalid_argument("pr needs at least one detection log");
    for (const auto& s : scripts)
        if (s.script.empty()) throw std::invalid_argument("deviation script '" + s.name + "' is empty");
}

ExperimentSpec ExperimentSpec::from_json(const json& j, const std::filesystem::path& base) {
    static const char* known[] = {"experiment", "sessions", "seed", "scenario", "noise", "scripts", "guided_time",
                                  "manual_time", "manual_steps", "logs", "threads", "output", "description"};
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) == std::end(known))
            throw std::invalid_argument("unknown field '" + key + "' in experiment spec");
    }
    ExperimentSpec s;
    s.experiment = experiment_kind_from_string(j.at("experiment").get<std::string>());
    s.sessions = j.value("sessions", 1);
    s.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("scenario")) {
        const auto& sc = j["scenario"];
        if (sc.is_string()) {
            s.scenario = orchestrator::Scenario::load(resolve(base, sc.get<std::string>()));
        } else {
            s.scenario = orchestrator::Scenario::from_json(sc, base);
        }
    }
    if (j.contains("noise")) {
        const auto& n = j["noise"];
        s.noise = detection::NoiseModel::from_json(n.is_string() ? load_json(resolve(base, n.get<std::string>())) : n);
    }
    if (j.contains("scripts")) {
        for (const auto& item : j["scripts"]) {
            NamedScript ns;
            ns.name = item.value("name", "script " + std::to_string(s.scripts.size() + 1));
            for (const auto& e : item.at("script")) ns.script.push_back({e.at("step").get<int>(), e.at("component").get<int>()});
            s.scripts.push_back(std::move(ns));
        }
    }
    if (j.contains("guided_time")) s.guided_time = sim::TimeModel::from_json(j["guided_time"]);
    if (j.contains("manual_time")) s.manual_time = sim::TimeModel::from_json(j["manual_time"]);
    if (j.contains("manual_steps")) s.manual_steps = j["manual_steps"].get<int>();
    if (j.contains("logs")) {
        for (const auto& item : j["logs"])
            s.logs.push_back({item.at("detector").get<std::string>(), resolve(base, item.at("path").get<std::string>())});
    }
    s.threads = j.value("threads", 0);
    if (j.contains("output")) s.output_dir = resolve(base, j["output"].get<std::string>());
    s.validate();
    return s;
}

ExperimentSpec ExperimentSpec::load(const std::filesystem::path& path) {
    return from_json(load_json(path), path.parent_path());
}

E1Result run_experiment1(const ExperimentSpec& spec) {
    spec.validate();
    const auto base = base_scenario(spec);
    E1Result r;
    r.rows.resize(static_cast<std::size_t>(spec.sessions));
    parallel_for(r.rows.size(), spec.threads, [&](std::size_t i) {
        auto s = base;
        s.seed = spec.seed + i;
        r.rows[i] = run_one(s, static_cast<int>(i) + 1, "");
    });
    r.success_rate = success_rate(r.rows);
    std::vector<double> times, llm;
    for (const auto& row : r.rows) {
        if (row.success) times.push_back(row.total_seconds);
        llm.push_back(row.average_llm_seconds);
    }
    r.total_time = summarize(times);
    r.llm_time = summarize(llm);
    return r;
}

E2Result run_experiment2(const ExperimentSpec& spec) {
    spec.validate();
    const auto base = base_scenario(spec);
    const auto scripts = spec.scripts.empty() ? reference_deviation_scripts() : spec.scripts;
    const auto runs = static_cast<std::size_t>(spec.sessions);
    E2Result r;
    r.rows.resize(scripts.size() * runs);
    parallel_for(r.rows.size(), spec.threads, [&](std::size_t i) {
        const auto& script = scripts[i / runs];
        auto s = base;
        s.op.kind = sim::OperatorKind::DeviateScript;
        s.op.script = script.script;
        s.seed = spec.seed + i % runs;
        r.rows[i] = run_one(s, static_cast<int>(i) + 1, script.name);
    });
    r.success_rate = success_rate(r.rows);
    return r;
}

E3Result run_experiment3(const ExperimentSpec& spec) {
    spec.validate();
    auto base = base_scenario(spec);
    if (spec.guided_time) base.time = *spec.guided_time;
    const auto n = static_cast<std::size_t>(spec.sessions);
    E3Result r;
    r.guided.resize(n);
    r.manual.resize(n);

    parallel_for(n, spec.threads, [&](std::size_t i) {
        auto s = base;
        s.seed = spec.seed + i;
        r.guided[i] = run_one(s, static_cast<int>(i) + 1, "").total_seconds;
    });

    const int steps = spec.manual_steps.value_or(static_cast<int>(load_catalog(base.catalog_path).size()));
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t seed = spec.seed + i;
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6d616e75u};
        std::mt19937_64 rng(seq);
        r.manual[i] = sim::simulate_manual_session(spec.manual_time, steps, rng);
    }
    r.guided_stats = summarize(r.guided);
    r.manual_stats = summarize(r.manual);
    r.reduction = r.manual_stats.mean > 0 ? 1.0 - r.guided_stats.mean / r.manual_stats.mean : 0.0;
    return r;
}

PrResult run_pr(const ExperimentSpec& spec) {
    spec.validate();
    PrResult r;
    for (const auto& log : spec.logs) r.detectors.emplace_back(log.detector, compute_pr(detection::read_detection_log(log.path)));
    return r;
}

namespace {

Table session_table(const std::vector<SessionRow>& rows, bool with_order) {
    Table t;
    t.header = {"Test", "N° False Positives", "N° False Negatives", "Total Time [s]", "Average LLM Time [s]", "Success"};
    if (with_order) t.header.insert(t.header.begin() + 1, "Script");
    if (with_order) t.header.push_back("Assembly Order");
    t.header.insert(t.header.end(), {"Termination", "Iterations", "Deliveries", "Rejected Attempts", "Seed"});
    for (const auto& row : rows) {
        std::vector<std::string> cells = {std::to_string(row.test), row.fp_text, row.fn_text,
                                          row.success ? fixed(row.total_seconds, 1) : "-",
                                          fixed(row.average_llm_seconds, 1), yes_no(row.success)};
        if (with_order) cells.insert(cells.begin() + 1, row.script);
        if (with_order) cells.push_back(row.order);
        cells.insert(cells.end(), {orchestrator::to_string(row.termination), std::to_string(row.iterations),
                                   std::to_string(row.deliveries), std::to_string(row.rejected_attempts),
                                   std::to_string(row.seed)});
        t.rows.push_back(std::move(cells));
    }
    return t;
}

json rows_json(const std::vector<SessionRow>& rows) {
    json j = json::array();
    for (const auto& row : rows) {
        j.push_back({{"test", row.test},
                     {"script", row.script},
                     {"seed", row.seed},
                     {"success", row.success},
                     {"termination", orchestrator::to_string(row.termination)},
                     {"fp", row.fp},
                     {"fn", row.fn},
                     {"order", row.order}});
    }
    return j;
}

}  // namespace

ExperimentReport make_report(const ExperimentSpec& spec, const E1Result& r) {
    ExperimentReport rep;
    rep.name = "e1";
    rep.title = "Experiment 1: guided assembly under detection noise";
    rep.notes = {"Simulated sessions. Detection noise rates are declared calibration inputs, not fitted values.",
                 "Total time and its statistics cover successful sessions only."};
    rep.rows = session_table(r.rows, false);
    const auto ok = std::count_if(r.rows.begin(), r.rows.end(), [](const SessionRow& s) { return s.success; });
    rep.summary.header = {"Sessions", "Successes", "Success Rate", "Mean Total Time [s]", "σ Total Time [s]",
                          "Mean LLM Time [s]"};
    rep.summary.rows = {{std::to_string(r.rows.size()), std::to_string(ok), fixed(r.success_rate, 3),
                         fixed(r.total_time.mean, 1), fixed(r.total_time.stddev, 1), fixed(r.llm_time.mean, 1)}};
    rep.summary_json = {{"experiment", "e1"},
                        {"sessions", r.rows.size()},
                        {"seed", spec.seed},
                        {"successes", ok},
                        {"success_rate", r.success_rate},
                        {"total_time_mean", r.total_time.mean},
                        {"total_time_stddev", r.total_time.stddev},
                        {"llm_time_mean", r.llm_time.mean}};
    return rep;
}

ExperimentReport make_report(const ExperimentSpec& spec, const E2Result& r) {
    ExperimentReport rep;
    rep.name = "e2";
    rep.title = "Experiment 2: recovery from operator deviations";
    rep.notes = {"Simulated sessions with scripted deviations from the recommendation."};
    rep.rows = session_table(r.rows, true);
    const auto ok = std::count_if(r.rows.begin(), r.rows.end(), [](const SessionRow& s) { return s.success; });
    rep.summary.header = {"Runs", "Successes", "Success Rate"};
    rep.summary.rows = {{std::to_string(r.rows.size()), std::to_string(ok), fixed(r.success_rate, 3)}};
    rep.summary_json = {{"experiment", "e2"},
                        {"runs", r.rows.size()},
                        {"seed", spec.seed},
                        {"successes", ok},
                        {"success_rate", r.success_rate},
                        {"rows", rows_json(r.rows)}};
    return rep;
}

ExperimentReport make_report(const ExperimentSpec& spec, const E3Result& r) {
    ExperimentReport rep;
    rep.name = "e3";
    rep.title = "Experiment 3 (calibration): guided versus unguided assembly time";
    rep.notes = {"Calibration demonstration: both time models are tuned to reference aggregates and are not predictive.",
                 "The unguided group is simulated without detector or robot, with a wrong-order rework penalty."};
    rep.rows.header = {"Group", "Session", "Total Time [s]"};
    for (std::size_t i = 0; i < r.guided.size(); ++i) rep.rows.rows.push_back({"guided", std::to_string(i + 1), fixed(r.guided[i], 1)});
    for (std::size_t i = 0; i < r.manual.size(); ++i) rep.rows.rows.push_back({"manual", std::to_string(i + 1), fixed(r.manual[i], 1)});
    rep.summary.header = {"Group", "Sessions", "Mean [s]", "σ [s]", "Reduction [%]"};
    rep.summary.rows = {{"guided", std::to_string(r.guided_stats.n), fixed(r.guided_stats.mean, 1), fixed(r.guided_stats.stddev, 1),
                         fixed(100.0 * r.reduction, 1)},
                        {"manual", std::to_string(r.manual_stats.n), fixed(r.manual_stats.mean, 1), fixed(r.manual_stats.stddev, 1), "-"}};
    rep.summary_json = {{"experiment", "e3"},
                        {"label", "calibration"},
                        {"sessions_per_group", spec.sessions},
                        {"seed", spec.seed},
                        {"guided_mean", r.guided_stats.mean},
                        {"guided_stddev", r.guided_stats.stddev},
                        {"manual_mean", r.manual_stats.mean},
                        {"manual_stddev", r.manual_stats.stddev},
                        {"reduction", r.reduction}};
    return rep;
}

ExperimentReport make_report(const ExperimentSpec&, const PrResult& r) {
    ExperimentReport rep;
    rep.name = "pr";
    rep.title = "Component detection: precision and recall";
    rep.notes = {"A detection counts when the component is named, whatever its bounding box. N/A marks an undefined ratio."};

    std::vector<std::string> components;
    for (const auto& [det, m] : r.detectors)
        for (const auto& c : m.components)
            if (std::find(components.begin(), components.end(), c.component) == components.end()) components.push_back(c.component);

    rep.summary.header = {"Component"};
    for (const auto& [det, m] : r.detectors) {
        rep.summary.header.push_back(det + " P");
        rep.summary.header.push_back(det + " R");
    }
    for (const auto& name : components) {
        std::vector<std::string> cells{name};
        for (const auto& [det, m] : r.detectors) {
            auto it = std::find_if(m.components.begin(), m.components.end(), [&](const ComponentMetrics& c) { return c.component == name; });
            cells.push_back(it == m.components.end() ? "-" : ratio(it->precision));
            cells.push_back(it == m.components.end() ? "-" : ratio(it->recall));
        }
        rep.summary.rows.push_back(std::move(cells));
    }

    rep.rows_title = "Counts";
    rep.rows.header = {"Detector", "Component", "TP", "FP", "FN", "TN", "Precision", "Recall"};
    rep.summary_json = {{"experiment", "pr"}, {"detectors", json::object()}};
    for (const auto& [det, m] : r.detectors) {
        json comps = json::array();
        for (const auto& c : m.components) {
            rep.rows.rows.push_back({det, c.component, std::to_string(c.tp), std::to_string(c.fp), std::to_string(c.fn),
                                     std::to_string(c.tn), ratio(c.precision, 3), ratio(c.recall, 3)});
            comps.push_back({{"component", c.component},
                             {"tp", c.tp},
                             {"fp", c.fp},
                             {"fn", c.fn},
                             {"tn", c.tn},
                             {"precision", c.precision ? json(*c.precision) : json(nullptr)},
                             {"recall", c.recall ? json(*c.recall) : json(nullptr)}});
        }
        rep.summary_json["detectors"][det] = comps;
    }
    return rep;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
    switch (spec.experiment) {
        case ExperimentKind::E1: return make_report(spec, run_experiment1(spec));
        case ExperimentKind::E2: return make_report(spec, run_experiment2(spec));
        case ExperimentKind::E3: return make_report(spec, run_experiment3(spec));
        case ExperimentKind::Pr: return make_report(spec, run_pr(spec));
    }
    throw std::invalid_argument("unknown experiment");
}

}  // namespace cobot::eval
