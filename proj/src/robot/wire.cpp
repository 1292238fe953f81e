#include "cobot/robot/wire.hpp"

#include <nlohmann/json.hpp>

namespace cobot::robot {

namespace {

using nlohmann::json;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

json pose_fields(const Pose& p) {
    return {{"position", {p.position.x, p.position.y, p.position.z}},
            {"orientation", {p.orientation.w, p.orientation.x, p.orientation.y, p.orientation.z}}};
}

Pose read_pose(const json& j) {
    const auto& pos = j.at("position");
    const auto& q = j.at("orientation");
    if (!pos.is_array() || pos.size() != 3) throw WireError("position must have 3 numbers");
    if (!q.is_array() || q.size() != 4) throw WireError("orientation must have 4 numbers");
    Pose p{{pos[0].get<double>(), pos[1].get<double>(), pos[2].get<double>()},
           {q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>()}};
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw WireError(e.what());
    }
    return p;
}

std::int64_t read_seq(const json& j) {
    const auto& s = j.at("seq");
    if (!s.is_number_integer()) throw WireError("seq must be an integer");
    return s.get<std::int64_t>();
}

}  // namespace

std::string encode_frame(const WireFrame& frame) {
    json j = std::visit(
        overloaded{
            [](const HelloFrame& f) { return json{{"type", "hello"}, {"seq", f.seq}, {"client", f.client}}; },
            [](const MoveToFrame& f) {
                json j = pose_fields(f.pose);
                j["type"] = "move_to";
                j["seq"] = f.seq;
                j["speed_class"] = planner::to_string(f.speed);
                return j;
            },
            [](const SetGripperFrame& f) {
                return json{{"type", "set_gripper"}, {"seq", f.seq}, {"gripper", planner::to_string(f.gripper)}};
            },
            [](const AckFrame& f) { return json{{"type", "ack"}, {"seq", f.seq}, {"elapsed_s", f.elapsed_s}}; },
            [](const NackFrame& f) { return json{{"type", "nack"}, {"seq", f.seq}, {"reason", f.reason}}; },
            [](const StatusFrame& f) {
                json j = pose_fields(f.pose);
                j["type"] = "status";
                j["seq"] = f.seq;
                j["gripper"] = planner::to_string(f.gripper);
                j["held"] = f.held ? json(*f.held) : json(nullptr);
                j["delivery_zone"] = f.delivery_zone;
                return j;
            },
        },
        frame);
    return j.dump() + "\n";
}

WireFrame decode_frame(std::string_view line) {
    if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    try {
        const json j = json::parse(line);
        if (!j.is_object()) throw WireError("frame is not a JSON object");
        const std::string type = j.at("type").get<std::string>();
        if (type == "hello") return HelloFrame{read_seq(j), j.value("client", std::string())};
        if (type == "move_to")
            return MoveToFrame{read_seq(j), read_pose(j), planner::speed_class_from_string(j.at("speed_class").get<std::string>())};
        if (type == "set_gripper") return SetGripperFrame{read_seq(j), planner::gripper_from_string(j.at("gripper").get<std::string>())};
        if (type == "ack") return AckFrame{read_seq(j), j.at("elapsed_s").get<double>()};
        if (type == "nack") return NackFrame{read_seq(j), j.at("reason").get<std::string>()};
        if (type == "status") {
            StatusFrame f{read_seq(j), read_pose(j), planner::gripper_from_string(j.at("gripper").get<std::string>()), {}, {}};
            if (!j.at("held").is_null()) f.held = j.at("held").get<int>();
            f.delivery_zone = j.at("delivery_zone").get<std::vector<int>>();
            return f;
        }
        throw WireError("unknown frame type '" + type + "'");
    } catch (const json::exception& e) {
        throw WireError(std::string("malformed frame: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw WireError(std::string("malformed frame: ") + e.what());
    }
}

const char* frame_type(const WireFrame& frame) {
    static const char* names[] = {"hello", "move_to", "set_gripper", "ack", "nack", "status"};
    return names[frame.index()];
}

std::int64_t frame_seq(const WireFrame& frame) {
    return std::visit([](const auto& f) { return f.seq; }, frame);
}

WireFrame command_frame(std::int64_t seq, const planner::RobotAction& action) {
    if (const auto* m = std::get_if<planner::MoveTo>(&action)) return MoveToFrame{seq, m->pose, m->speed};
    return SetGripperFrame{seq, std::get<planner::SetGripper>(action).state};
}

}  // namespace cobot::robot
