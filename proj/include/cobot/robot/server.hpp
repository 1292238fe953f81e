#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "cobot/robot/robot_sim.hpp"

namespace cobot::robot {

/// TCP front end of a RobotSim. Serves one client at a time on a background thread;
/// extra clients get a "busy" nack and are disconnected. Malformed lines get a
/// "parse_error" nack and the connection stays open. A status frame follows every
/// acknowledged gripper command.
class SimulatedRobotServer {
public:
    /// Binds immediately (port 0 picks a free port). Throws RobotLinkError{BindFailure}.
    SimulatedRobotServer(std::shared_ptr<RobotSim> sim, const std::string& host, std::uint16_t port);
    ~SimulatedRobotServer();
    SimulatedRobotServer(const SimulatedRobotServer&) = delete;
    SimulatedRobotServer& operator=(const SimulatedRobotServer&) = delete;

    std::uint16_t port() const noexcept;
    /// When set, every accepted handshake starts from a fresh cell (RobotSim::reset), so one
    /// server can serve consecutive sessions.
    void set_reset_on_hello(bool enabled);
    /// Drops the current client, if any (fault injection).
    void disconnect_client();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace cobot::robot
