#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cobot/planner/actions.hpp"

namespace cobot::robot {

using planner::Gripper;
using planner::Pose;
using planner::SpeedClass;

struct HelloFrame {
    std::int64_t seq = 0;
    std::string client;
    bool operator==(const HelloFrame&) const = default;
};

struct MoveToFrame {
    std::int64_t seq = 0;
    Pose pose;
    SpeedClass speed = SpeedClass::Transit;
    bool operator==(const MoveToFrame&) const = default;
};

struct SetGripperFrame {
    std::int64_t seq = 0;
    Gripper gripper = Gripper::Open;
    bool operator==(const SetGripperFrame&) const = default;
};

struct AckFrame {
    std::int64_t seq = 0;
    double elapsed_s = 0.0;
    bool operator==(const AckFrame&) const = default;
};

/// `seq` is -1 when the offending line could not be parsed.
struct NackFrame {
    std::int64_t seq = 0;
    std::string reason;
    bool operator==(const NackFrame&) const = default;
};

/// Unsolicited robot state report; `seq` is the last command the robot handled.
struct StatusFrame {
    std::int64_t seq = 0;
    Pose pose;
    Gripper gripper = Gripper::Open;
    std::optional<int> held;
    std::vector<int> delivery_zone;
    bool operator==(const StatusFrame&) const = default;
};

using WireFrame = std::variant<HelloFrame, MoveToFrame, SetGripperFrame, AckFrame, NackFrame, StatusFrame>;

class WireError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One JSON object plus the terminating LF.
std::string encode_frame(const WireFrame& frame);
/// Accepts a line with or without its LF. Throws WireError on anything malformed.
WireFrame decode_frame(std::string_view line);

const char* frame_type(const WireFrame& frame);
/// seq carried by any frame type.
std::int64_t frame_seq(const WireFrame& frame);

WireFrame command_frame(std::int64_t seq, const planner::RobotAction& action);

}  // namespace cobot::robot
