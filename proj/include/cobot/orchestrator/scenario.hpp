#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "cobot/orchestrator/session.hpp"
#include "cobot/robot/server.hpp"

namespace cobot::orchestrator {

struct DetectorSpec {
    std::string kind = "oracle";  // oracle | llm | replay
    std::optional<std::filesystem::path> fixture;
    llm::EndpointConfig endpoint;
    /// llm only: also append every exchange to this replay fixture.
    std::optional<std::filesystem::path> record_to;
};

struct PlannerSpec {
    std::string kind = "reference";  // reference | llm
    std::optional<std::filesystem::path> fixture;  // llm via replay instead of HTTP
    llm::EndpointConfig endpoint;
};

/// Everything needed to run one session. Relative paths resolve against the scenario file.
struct Scenario {
    std::filesystem::path catalog_path;
    std::filesystem::path layout_path;
    sim::OperatorPolicy op;
    detection::NoiseModel noise;
    sim::TimeModel time;
    std::uint64_t seed = 0;
    int max_iterations = 20;
    int deadlock_window = 3;
    int backend_retries = 2;
    DetectorSpec detector;
    PlannerSpec planner;
    /// "in_process", "loopback" (local TCP server in this process) or "host:port" of an
    /// external robot server.
    std::string robot = "in_process";

    static Scenario from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
    static Scenario load(const std::filesystem::path& path);
    /// Built-in defaults: shipped catalog and layout, oracle detector, reference planner.
    static Scenario defaults();
};

/// Owns the catalog, world, robot, detector, planner and operator of one session.
class SessionRig {
public:
    /// `op` replaces the scenario's simulated operator (e.g. a console operator).
    explicit SessionRig(const Scenario& scenario, std::unique_ptr<sim::Operator> op = nullptr);
    ~SessionRig();

    SessionConfig config() const;
    const ComponentCatalog& catalog() const { return *catalog_; }
    const std::shared_ptr<sim::WorldHandle>& world() const { return world_; }

private:
    Scenario scenario_;
    std::unique_ptr<ComponentCatalog> catalog_;
    std::unique_ptr<planner::MagazineLayout> layout_;
    std::shared_ptr<sim::WorldHandle> world_;
    std::shared_ptr<robot::RobotSim> robot_sim_;
    std::unique_ptr<robot::SimulatedRobotServer> server_;
    std::unique_ptr<robot::RobotLink> link_;
    std::vector<std::shared_ptr<llm::ChatClient>> clients_;
    std::unique_ptr<detection::Detector> detector_;
    std::unique_ptr<planner::Planner> planner_;
    std::unique_ptr<sim::Operator> op_;
    bool mirror_ = false;
};

}  // namespace cobot::orchestrator
