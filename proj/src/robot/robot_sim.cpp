#include "cobot/robot/robot_sim.hpp"

namespace cobot::robot {

double CycleModel::seconds(const planner::RobotAction& action) const {
    if (const auto* m = std::get_if<planner::MoveTo>(&action))
        return m->speed == SpeedClass::Transit ? transit_s : approach_s;
    return gripper_s;
}

double CycleModel::job_seconds(const std::vector<planner::RobotAction>& actions) const {
    double total = 0.0;
    for (const auto& a : actions) total += seconds(a);
    return total;
}

RobotSim::RobotSim(const ComponentCatalog& catalog, planner::MagazineLayout layout,
                   std::shared_ptr<sim::WorldHandle> world, CycleModel cycle)
    : catalog_(catalog), layout_(std::move(layout)), world_(std::move(world)), cycle_(cycle) {
    layout_.check_covers(catalog_);
    // Park above the delivery pose.
    pose_ = layout_.delivery_pose();
    pose_.position.z += layout_.approach_offset();
}

void RobotSim::reset() {
    world_->with([&](sim::WorldState& w) { w = sim::WorldState::initial(catalog_); });
    pose_ = layout_.delivery_pose();
    pose_.position.z += layout_.approach_offset();
    gripper_ = Gripper::Open;
}

std::optional<ComponentId> RobotSim::component_at(const Pose& pose) const {
    for (const auto& c : catalog_.components()) {
        if (!c.magazine_slot) continue;
        auto slot = layout_.slot_pose(*c.magazine_slot);
        if (slot && planner::distance(slot->position, pose.position) <= kSlotToleranceM) return c.id;
    }
    return std::nullopt;
}

ActionOutcome RobotSim::execute(const planner::RobotAction& action) {
    const double dt = cycle_.seconds(action);
    if (const auto* m = std::get_if<planner::MoveTo>(&action)) {
        try {
            m->pose.validate();
        } catch (const std::invalid_argument&) {
            return {false, 0.0, "invalid_pose"};
        }
        pose_ = m->pose;
        return {true, dt, {}};
    }

    const Gripper target = std::get<planner::SetGripper>(action).state;
    return world_->with([&](sim::WorldState& w) -> ActionOutcome {
        if (target == Gripper::Close) {
            if (gripper_ == Gripper::Close) return {true, dt, {}};
            if (auto id = component_at(pose_)) {
                if (!w.magazine.count(*id)) return {false, 0.0, "empty_slot"};
                w.magazine.erase(*id);
                w.held = *id;
            }
            gripper_ = Gripper::Close;
            return {true, dt, {}};
        }
        if (w.held) {
            if (planner::distance(pose_.position, layout_.delivery_pose().position) <= kSlotToleranceM) {
                w.delivery_zone.push_back(*w.held);
            } else if (component_at(pose_) == w.held) {
                w.magazine.insert(*w.held);  // put back into its own slot
            } else {
                return {false, 0.0, "no_drop_zone"};
            }
            w.held.reset();
        }
        gripper_ = Gripper::Open;
        return {true, dt, {}};
    });
}

RobotSimState RobotSim::state() {
    auto held = world_->with([](sim::WorldState& w) { return w.held; });
    return {pose_, gripper_, held};
}

StatusFrame RobotSim::status(std::int64_t seq) {
    return world_->with([&](sim::WorldState& w) {
        return StatusFrame{seq, pose_, gripper_, w.held, w.delivery_zone};
    });
}

}  // namespace cobot::robot
