#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cobot/eval/experiment.hpp"
#include "cobot/orchestrator/gateway.hpp"
#include "cobot/orchestrator/scenario.hpp"
#include "cobot/orchestrator/session_log.hpp"
#include "cobot/robot/server.hpp"

using namespace cobot;
using json = nlohmann::json;

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

struct RunOptions {
    std::string scenario;
    std::string detector;
    std::string detector_fixture;
    std::string planner;
    std::string planner_fixture;
    std::string op = "";
    std::string robot;
    std::optional<std::uint64_t> seed;
    std::optional<int> max_iterations;
    std::string out;
    bool resume = false;
    std::string gateway = "127.0.0.1:8080";
    double turn_timeout_s = 300.0;
    double linger_s = 2.0;
};

sim::OperatorPolicy load_script(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open operator script " + path.string());
    json j = json::parse(in);
    // Accept a bare script array, an operator object, or a scenario file's operator section.
    if (j.is_object() && j.contains("operator")) j = j["operator"];
    if (j.is_array()) j = json{{"script", j}};
    if (!j.contains("kind")) j["kind"] = "deviate_script";
    return sim::OperatorPolicy::from_json(j);
}

void print_result(const orchestrator::SessionResult& r) {
    std::cout << "termination: " << orchestrator::to_string(r.termination) << "\n"
              << "success: " << (r.success ? "yes" : "no") << "\n"
              << "assembly order: " << format_sequence(r.realized_order) << "\n"
              << "iterations: " << r.iterations << ", deliveries: " << r.deliveries << ", overrides: " << r.overrides << "\n"
              << "false positives: " << r.total_fp() << ", false negatives: " << r.total_fn() << "\n"
              << "simulated time: " << r.total_seconds << " s (llm " << r.llm_seconds << " s)\n";
    if (!r.detail.empty()) std::cout << "detail: " << r.detail << "\n";
}

int run_command(const RunOptions& o) {
    auto scenario = o.scenario.empty() ? orchestrator::Scenario::defaults() : orchestrator::Scenario::load(o.scenario);
    if (!o.detector.empty()) scenario.detector.kind = o.detector;
    if (!o.detector_fixture.empty()) scenario.detector.fixture = o.detector_fixture;
    if (!o.planner.empty()) scenario.planner.kind = o.planner;
    if (!o.planner_fixture.empty()) scenario.planner.fixture = o.planner_fixture;
    if (!o.robot.empty()) scenario.robot = o.robot;
    if (o.seed) scenario.seed = *o.seed;
    if (o.max_iterations) scenario.max_iterations = *o.max_iterations;

    const bool console = o.op == "console";
    if (o.op == "compliant") {
        scenario.op = {};
    } else if (o.op.rfind("script:", 0) == 0) {
        scenario.op = load_script(o.op.substr(7));
    } else if (!o.op.empty() && !console) {
        throw std::invalid_argument("--operator must be compliant, script:<file> or console");
    }

    std::optional<orchestrator::ResumePoint> resume;
    if (o.resume) {
        if (o.out.empty()) throw std::invalid_argument("--resume needs --out pointing at an earlier run");
        resume = orchestrator::resume_point(orchestrator::read_session_log(o.out));
        std::cout << "resuming after iteration " << resume->t << "\n";
    }

    if (!console) {
        orchestrator::SessionRig rig(scenario);
        auto cfg = rig.config();
        if (!o.out.empty()) cfg.log_dir = o.out;
        cfg.resume = resume;
        const auto r = orchestrator::run_session(cfg);
        print_result(r);
        return r.success ? 0 : 1;
    }

    // A person at the browser console plays the operator.
    const auto catalog = load_catalog(scenario.catalog_path);
    orchestrator::SessionHub hub(catalog);
    const auto [host, port] = robot::parse_endpoint(o.gateway);
    orchestrator::Gateway gateway(hub, host, port);
    std::cout << "operator gateway on http://" << host << ":" << gateway.port() << "/session" << std::endl;

    const auto timeout = std::chrono::milliseconds(static_cast<long>(o.turn_timeout_s * 1000));
    orchestrator::SessionRig rig(scenario, std::make_unique<orchestrator::ConsoleOperator>(hub, timeout));
    auto cfg = rig.config();
    cfg.observer = &hub;
    if (!o.out.empty()) cfg.log_dir = o.out;
    cfg.resume = resume;
    const auto r = orchestrator::run_session(cfg);
    print_result(r);
    // Let connected consoles receive the final events before the gateway goes away.
    std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long>(o.linger_s * 1000)));
    hub.close();
    gateway.stop();
    return r.success ? 0 : 1;
}

int eval_command(const std::string& which, const std::string& spec_path, const std::string& out,
                 std::optional<int> sessions, std::optional<int> threads) {
    auto spec = eval::ExperimentSpec::load(spec_path);
    if (eval::experiment_kind_from_string(which) != spec.experiment)
        throw std::invalid_argument("spec " + spec_path + " describes " + eval::to_string(spec.experiment) + ", not " + which);
    if (sessions) spec.sessions = *sessions;
    if (threads) spec.threads = *threads;
    std::filesystem::path dir = !out.empty() ? std::filesystem::path(out) : spec.output_dir.value_or("");
    if (dir.empty()) throw std::invalid_argument("no output directory: pass --out or set \"output\" in the spec");

    const auto report = eval::run_experiment(spec);
    report.write(dir);
    std::cout << report.title << "\n\n" << report.summary.to_markdown() << "\nreport written to " << dir.string() << "\n";
    return 0;
}

int serve_robot_command(const std::string& listen, const std::string& catalog_path, const std::string& layout_path) {
    const auto catalog = load_catalog(catalog_path);
    auto layout = planner::MagazineLayout::load(layout_path);
    layout.check_covers(catalog);
    auto world = std::make_shared<sim::WorldHandle>(sim::WorldState::initial(catalog));
    auto sim = std::make_shared<robot::RobotSim>(catalog, layout, world);
    const auto [host, port] = robot::parse_endpoint(listen);
    robot::SimulatedRobotServer server(sim, host, port);
    server.set_reset_on_hello(true);
    std::cout << "simulated robot listening on " << host << ":" << server.port() << std::endl;

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    std::cout << "stopped" << std::endl;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robot-assisted assembly orchestrator"};
    app.require_subcommand(1);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Run one assembly session");
    run_cmd->add_option("--scenario", run.scenario, "Scenario JSON (built-in defaults when omitted)")->check(CLI::ExistingFile);
    run_cmd->add_option("--detector", run.detector, "Detector backend")->check(CLI::IsMember({"oracle", "llm", "replay"}));
    run_cmd->add_option("--detector-fixture", run.detector_fixture, "Replay fixture for the detector");
    run_cmd->add_option("--planner", run.planner, "Planner policy")->check(CLI::IsMember({"reference", "llm"}));
    run_cmd->add_option("--planner-fixture", run.planner_fixture, "Replay fixture for the llm planner");
    run_cmd->add_option("--operator", run.op, "compliant, script:<file> or console");
    run_cmd->add_option("--robot", run.robot, "in_process, loopback or host:port of a robot server");
    run_cmd->add_option("--seed", run.seed, "Session seed");
    run_cmd->add_option("--max-iterations", run.max_iterations, "Iteration cap");
    run_cmd->add_option("--out", run.out, "Directory for session.ndjson, det_<t>.txt and result.json");
    run_cmd->add_flag("--resume", run.resume, "Continue the session logged in --out");
    run_cmd->add_option("--gateway", run.gateway, "Console mode: host:port of the operator gateway")->capture_default_str();
    run_cmd->add_option("--turn-timeout", run.turn_timeout_s, "Console mode: seconds to wait for the operator")->capture_default_str();
    run_cmd->add_option("--linger", run.linger_s, "Console mode: seconds to keep serving after the session ends")->capture_default_str();

    std::string which, spec_path, eval_out;
    std::optional<int> sessions, threads;
    auto* eval_cmd = app.add_subcommand("eval", "Run an experiment and write its report");
    eval_cmd->add_option("experiment", which, "e1, e2, e3 or pr")->required()->check(CLI::IsMember({"e1", "e2", "e3", "pr"}));
    eval_cmd->add_option("--spec", spec_path, "Experiment spec JSON")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--out", eval_out, "Report directory");
    eval_cmd->add_option("--sessions", sessions, "Override the session count");
    eval_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");

    std::string listen, catalog_path, layout_path;
    auto* serve_cmd = app.add_subcommand("serve-robot", "Serve the simulated robot over TCP");
    serve_cmd->add_option("--listen", listen, "host:port")->required();
    serve_cmd->add_option("--catalog", catalog_path, "Catalog JSON")->check(CLI::ExistingFile);
    serve_cmd->add_option("--layout", layout_path, "Magazine layout JSON")->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return run_command(run);
        if (*eval_cmd) return eval_command(which, spec_path, eval_out, sessions, threads);
        if (*serve_cmd) {
            const auto defaults = orchestrator::Scenario::defaults();
            return serve_robot_command(listen, catalog_path.empty() ? defaults.catalog_path.string() : catalog_path,
                                       layout_path.empty() ? defaults.layout_path.string() : layout_path);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
