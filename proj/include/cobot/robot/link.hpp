#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cobot/planner/actions.hpp"
#include "cobot/robot/robot_sim.hpp"
#include "cobot/robot/wire.hpp"

namespace cobot::robot {

struct JobReport {
    int completed_actions = 0;
    double elapsed_s = 0.0;
};

class RobotLinkError : public std::runtime_error {
public:
    enum class Kind { ConnectionLost, NackReceived, Timeout, BindFailure, HandshakeRejected };
    RobotLinkError(Kind kind, const std::string& what, std::int64_t seq = -1, std::string reason = {},
                   JobReport partial = {})
        : std::runtime_error(what), kind_(kind), seq_(seq), reason_(std::move(reason)), partial_(partial) {}

    Kind kind() const noexcept { return kind_; }
    std::int64_t seq() const noexcept { return seq_; }
    const std::string& reason() const noexcept { return reason_; }
    /// Actions acknowledged before the failure.
    const JobReport& partial() const noexcept { return partial_; }

private:
    Kind kind_;
    std::int64_t seq_;
    std::string reason_;
    JobReport partial_;
};

const char* to_string(RobotLinkError::Kind k);

/// Executes pick-and-place jobs strictly in order, stopping at the first refusal.
class RobotLink {
public:
    virtual ~RobotLink() = default;
    virtual JobReport send_job(const std::vector<planner::RobotAction>& actions) = 0;
};

/// Drives a RobotSim directly, without a socket.
class InProcessRobotLink final : public RobotLink {
public:
    explicit InProcessRobotLink(std::shared_ptr<RobotSim> sim) : sim_(std::move(sim)) {}
    JobReport send_job(const std::vector<planner::RobotAction>& actions) override;

private:
    std::shared_ptr<RobotSim> sim_;
};

/// Line-protocol client. Connects and exchanges hello on construction.
class TcpRobotLink final : public RobotLink {
public:
    TcpRobotLink(const std::string& host, std::uint16_t port,
                 std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));
    ~TcpRobotLink() override;
    TcpRobotLink(const TcpRobotLink&) = delete;
    TcpRobotLink& operator=(const TcpRobotLink&) = delete;

    JobReport send_job(const std::vector<planner::RobotAction>& actions) override;
    /// Last status frame pushed by the robot, if any.
    const std::optional<StatusFrame>& last_status() const noexcept { return last_status_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::int64_t next_seq_ = 1;
    std::optional<StatusFrame> last_status_;
};

/// Parses "host:port".
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& text);

}  // namespace cobot::robot
