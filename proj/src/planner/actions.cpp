#include "cobot/planner/actions.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace cobot::planner {

double Quaternion::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

void Pose::validate() const {
    if (std::abs(orientation.norm() - 1.0) > 1e-6) throw std::invalid_argument("pose orientation is not a unit quaternion");
}

double distance(const Vec3& a, const Vec3& b) {
    return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

const char* to_string(SpeedClass s) { return s == SpeedClass::Transit ? "transit" : "approach"; }
const char* to_string(Gripper g) { return g == Gripper::Open ? "open" : "close"; }

SpeedClass speed_class_from_string(const std::string& s) {
    if (s == "transit") return SpeedClass::Transit;
    if (s == "approach") return SpeedClass::Approach;
    throw std::invalid_argument("unknown speed class '" + s + "'");
}

Gripper gripper_from_string(const std::string& s) {
    if (s == "open") return Gripper::Open;
    if (s == "close") return Gripper::Close;
    throw std::invalid_argument("unknown gripper state '" + s + "'");
}

MagazineLayout::MagazineLayout(std::map<int, Pose> slots, Pose delivery_pose, double approach_offset_m)
    : slots_(std::move(slots)), delivery_(delivery_pose), approach_offset_(approach_offset_m) {
    if (!(approach_offset_ > 0)) throw std::invalid_argument("approach offset must be positive");
    delivery_.validate();
    for (const auto& [slot, pose] : slots_) pose.validate();
}

std::optional<Pose> MagazineLayout::slot_pose(int slot) const {
    auto it = slots_.find(slot);
    if (it == slots_.end()) return std::nullopt;
    return it->second;
}

void MagazineLayout::check_covers(const ComponentCatalog& catalog) const {
    for (const auto& c : catalog.components()) {
        if (c.magazine_slot && !slots_.count(*c.magazine_slot))
            throw std::invalid_argument("magazine slot " + std::to_string(*c.magazine_slot) + " of component " +
                                        std::to_string(c.id) + " is not in the layout");
    }
}

nlohmann::json pose_to_json(const Pose& p) {
    return {{"position", {p.position.x, p.position.y, p.position.z}},
            {"orientation", {p.orientation.w, p.orientation.x, p.orientation.y, p.orientation.z}}};
}

Pose pose_from_json(const nlohmann::json& j) {
    const auto& pos = j.at("position");
    const auto& q = j.at("orientation");
    if (pos.size() != 3 || q.size() != 4) throw std::invalid_argument("pose needs 3 position and 4 orientation values");
    Pose p{{pos[0].get<double>(), pos[1].get<double>(), pos[2].get<double>()},
           {q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>()}};
    p.validate();
    return p;
}

MagazineLayout MagazineLayout::from_json(const nlohmann::json& j) {
    std::map<int, Pose> slots;
    for (const auto& [key, value] : j.at("slots").items()) slots[std::stoi(key)] = pose_from_json(value);
    return MagazineLayout(std::move(slots), pose_from_json(j.at("delivery_pose")), j.at("approach_offset_m").get<double>());
}

MagazineLayout MagazineLayout::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open layout file " + path.string());
    return from_json(nlohmann::json::parse(in));
}

std::vector<RobotAction> generate_actions(ComponentId component, const MagazineLayout& layout,
                                          const ComponentCatalog& catalog) {
    const auto& spec = catalog.at(component);
    if (!spec.magazine_slot) throw UnmappedSlot(component);
    auto slot = layout.slot_pose(*spec.magazine_slot);
    if (!slot) throw UnmappedSlot(component);

    auto above = [&](Pose p) {
        p.position.z += layout.approach_offset();
        return p;
    };
    const Pose& drop = layout.delivery_pose();
    return {
        MoveTo{above(*slot), SpeedClass::Transit},
        MoveTo{*slot, SpeedClass::Approach},
        SetGripper{Gripper::Close},
        MoveTo{above(*slot), SpeedClass::Approach},
        MoveTo{above(drop), SpeedClass::Transit},
        MoveTo{drop, SpeedClass::Approach},
        SetGripper{Gripper::Open},
        MoveTo{above(drop), SpeedClass::Approach},
    };
}

}  // namespace cobot::planner
