#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <stdexcept>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cobot/domain/catalog.hpp"

namespace cobot::planner {

struct Vec3 {
    double x = 0, y = 0, z = 0;
    bool operator==(const Vec3&) const = default;
};

/// Unit quaternion, scalar first.
struct Quaternion {
    double w = 1, x = 0, y = 0, z = 0;
    double norm() const;
    bool operator==(const Quaternion&) const = default;
};

/// End-effector pose in the robot base frame (meters).
struct Pose {
    Vec3 position;
    Quaternion orientation;

    /// Throws std::invalid_argument unless |q| is within 1e-6 of 1.
    void validate() const;
    bool operator==(const Pose&) const = default;
};

double distance(const Vec3& a, const Vec3& b);

enum class SpeedClass { Transit, Approach };
enum class Gripper { Open, Close };

const char* to_string(SpeedClass s);
const char* to_string(Gripper g);
SpeedClass speed_class_from_string(const std::string& s);
Gripper gripper_from_string(const std::string& s);

struct MoveTo {
    Pose pose;
    SpeedClass speed = SpeedClass::Transit;
    bool operator==(const MoveTo&) const = default;
};

struct SetGripper {
    Gripper state = Gripper::Open;
    bool operator==(const SetGripper&) const = default;
};

/// One discrete robot command: a waypoint or a gripper change.
using RobotAction = std::variant<MoveTo, SetGripper>;

/// Known magazine poses plus the single delivery pose near the operator.
class MagazineLayout {
public:
    MagazineLayout(std::map<int, Pose> slots, Pose delivery_pose, double approach_offset_m);

    const std::map<int, Pose>& slots() const noexcept { return slots_; }
    const Pose& delivery_pose() const noexcept { return delivery_; }
    double approach_offset() const noexcept { return approach_offset_; }
    std::optional<Pose> slot_pose(int slot) const;

    /// Throws std::invalid_argument if a catalog magazine_slot has no pose.
    void check_covers(const ComponentCatalog& catalog) const;

    static MagazineLayout from_json(const nlohmann::json& j);
    static MagazineLayout load(const std::filesystem::path& path);

private:
    std::map<int, Pose> slots_;
    Pose delivery_;
    double approach_offset_;
};

class UnmappedSlot : public std::runtime_error {
public:
    explicit UnmappedSlot(ComponentId id)
        : std::runtime_error("component " + std::to_string(id) + " has no mapped magazine slot"), id_(id) {}
    ComponentId component() const noexcept { return id_; }

private:
    ComponentId id_;
};

/// The eight-step pick-and-place: above slot, slot, close, above slot, above delivery,
/// delivery, open, above delivery. Only the vertical approach offset is added to layout poses.
std::vector<RobotAction> generate_actions(ComponentId component, const MagazineLayout& layout,
                                          const ComponentCatalog& catalog);

nlohmann::json pose_to_json(const Pose& p);
Pose pose_from_json(const nlohmann::json& j);

}  // namespace cobot::planner
