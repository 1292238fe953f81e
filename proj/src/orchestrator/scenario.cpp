#include "cobot/orchestrator/scenario.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace cobot::orchestrator {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw std::invalid_argument("unknown field '" + key + "' in " + where);
    }
}

/// Keeps the wrapped client alive for the lifetime of the recorder that forwards to it.
class RecordingOwner final : public llm::ChatClient {
public:
    RecordingOwner(std::unique_ptr<llm::ChatClient> inner, const std::filesystem::path& fixture)
        : inner_(std::move(inner)), recorder_(*inner_, fixture) {}
    llm::ChatReply complete(const json& request) override { return recorder_.complete(request); }

private:
    std::unique_ptr<llm::ChatClient> inner_;
    llm::RecordingChatClient recorder_;
};

}  // namespace

Scenario Scenario::defaults() {
    Scenario s;
    s.catalog_path = std::filesystem::path(COBOT_DATA_DIR) / "default_catalog.json";
    s.layout_path = std::filesystem::path(COBOT_DATA_DIR) / "default_layout.json";
    return s;
}

Scenario Scenario::from_json(const json& j, const std::filesystem::path& base) {
    reject_unknown(j, {"catalog", "layout", "operator", "noise", "time", "seed", "max_iterations", "deadlock_window",
                       "backend_retries", "detector", "planner", "robot", "description"},
                   "scenario");
    Scenario s = defaults();
    if (j.contains("catalog")) s.catalog_path = resolve(base, j["catalog"].get<std::string>());
    if (j.contains("layout")) s.layout_path = resolve(base, j["layout"].get<std::string>());
    if (j.contains("operator")) {
        const auto& o = j["operator"];
        if (o.contains("script_file")) {
            std::ifstream in(resolve(base, o["script_file"].get<std::string>()));
            if (!in) throw std::invalid_argument("cannot open operator script file");
            json merged = json::parse(in);
            for (const auto& [k, v] : o.items())
                if (k != "script_file") merged[k] = v;
            s.op = sim::OperatorPolicy::from_json(merged);
        } else {
            s.op = sim::OperatorPolicy::from_json(o);
        }
    }
    if (j.contains("noise")) {
        if (j["noise"].is_string()) {
            std::ifstream in(resolve(base, j["noise"].get<std::string>()));
            if (!in) throw std::invalid_argument("cannot open noise file " + j["noise"].get<std::string>());
            s.noise = detection::NoiseModel::from_json(json::parse(in));
        } else {
            s.noise = detection::NoiseModel::from_json(j["noise"]);
        }
    }
    if (j.contains("time")) s.time = sim::TimeModel::from_json(j["time"]);
    s.seed = j.value("seed", s.seed);
    s.max_iterations = j.value("max_iterations", s.max_iterations);
    s.deadlock_window = j.value("deadlock_window", s.deadlock_window);
    s.backend_retries = j.value("backend_retries", s.backend_retries);
    if (j.contains("detector")) {
        const auto& d = j["detector"];
        reject_unknown(d, {"kind", "fixture", "endpoint", "record_to"}, "detector");
        s.detector.kind = d.value("kind", s.detector.kind);
        if (d.contains("fixture")) s.detector.fixture = resolve(base, d["fixture"].get<std::string>());
        if (d.contains("endpoint")) s.detector.endpoint = llm::EndpointConfig::from_json(d["endpoint"]);
        if (d.contains("record_to")) s.detector.record_to = resolve(base, d["record_to"].get<std::string>());
    }
    if (j.contains("planner")) {
        const auto& p = j["planner"];
        reject_unknown(p, {"kind", "fixture", "endpoint"}, "planner");
        s.planner.kind = p.value("kind", s.planner.kind);
        if (p.contains("fixture")) s.planner.fixture = resolve(base, p["fixture"].get<std::string>());
        if (p.contains("endpoint")) s.planner.endpoint = llm::EndpointConfig::from_json(p["endpoint"]);
    }
    s.robot = j.value("robot", s.robot);
    return s;
}

Scenario Scenario::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open scenario " + path.string());
    return from_json(json::parse(in), path.parent_path());
}

SessionRig::SessionRig(const Scenario& scenario, std::unique_ptr<sim::Operator> op) : scenario_(scenario) {
    catalog_ = std::make_unique<ComponentCatalog>(load_catalog(scenario_.catalog_path));
    layout_ = std::make_unique<planner::MagazineLayout>(planner::MagazineLayout::load(scenario_.layout_path));
    layout_->check_covers(*catalog_);
    scenario_.op.validate(*catalog_);
    world_ = std::make_shared<sim::WorldHandle>(sim::WorldState::initial(*catalog_));

    if (scenario_.robot == "in_process" || scenario_.robot == "loopback") {
        robot_sim_ = std::make_shared<robot::RobotSim>(*catalog_, *layout_, world_);
        if (scenario_.robot == "loopback") {
            server_ = std::make_unique<robot::SimulatedRobotServer>(robot_sim_, "127.0.0.1", 0);
            link_ = std::make_unique<robot::TcpRobotLink>("127.0.0.1", server_->port());
        } else {
            link_ = std::make_unique<robot::InProcessRobotLink>(robot_sim_);
        }
    } else {
        auto [host, port] = robot::parse_endpoint(scenario_.robot);
        link_ = std::make_unique<robot::TcpRobotLink>(host, port);
        mirror_ = true;
    }

    const auto& d = scenario_.detector;
    detection::LlmDetectorConfig dcfg;
    dcfg.model = d.endpoint.model;
    if (d.kind == "oracle") {
        detector_ = std::make_unique<detection::OracleDetector>(*catalog_, scenario_.noise);
    } else if (d.kind == "replay") {
        if (!d.fixture) throw std::invalid_argument("replay detector needs a fixture");
        detector_ = detection::make_replay_detector(*catalog_, dcfg, *d.fixture);
    } else if (d.kind == "llm") {
        std::shared_ptr<llm::ChatClient> client;
        if (d.record_to)
            client = std::make_shared<RecordingOwner>(std::make_unique<llm::HttpChatClient>(d.endpoint), *d.record_to);
        else
            client = std::make_shared<llm::HttpChatClient>(d.endpoint);
        clients_.push_back(client);
        detector_ = std::make_unique<detection::LlmDetector>(*catalog_, dcfg, client);
    } else {
        throw std::invalid_argument("unknown detector kind '" + d.kind + "'");
    }

    const auto& p = scenario_.planner;
    if (p.kind == "reference") {
        planner_ = std::make_unique<planner::ReferencePlanner>(*catalog_);
    } else if (p.kind == "llm") {
        std::shared_ptr<llm::ChatClient> client;
        if (p.fixture)
            client = std::make_shared<llm::ReplayChatClient>(*p.fixture);
        else
            client = std::make_shared<llm::HttpChatClient>(p.endpoint);
        clients_.push_back(client);
        planner_ = std::make_unique<planner::LlmPlanner>(*catalog_, client, p.endpoint.model);
    } else {
        throw std::invalid_argument("unknown planner kind '" + p.kind + "'");
    }

    op_ = op ? std::move(op) : std::make_unique<sim::SimulatedOperator>(scenario_.op);
}

SessionRig::~SessionRig() {
    link_.reset();  // disconnect before the server goes away
    server_.reset();
}

SessionConfig SessionRig::config() const {
    SessionConfig c;
    c.catalog = catalog_.get();
    c.layout = layout_.get();
    c.detector = detector_.get();
    c.planner = planner_.get();
    c.op = op_.get();
    c.robot = link_.get();
    c.world = world_;
    c.time = scenario_.time;
    c.seed = scenario_.seed;
    c.max_iterations = scenario_.max_iterations;
    c.deadlock_window = scenario_.deadlock_window;
    c.backend_retries = scenario_.backend_retries;
    c.scene_images = scenario_.detector.kind != "oracle";
    c.mirror_robot_deliveries = mirror_;
    return c;
}

}  // namespace cobot::orchestrator
