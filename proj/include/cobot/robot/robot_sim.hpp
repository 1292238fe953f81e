#pragma once

#include <memory>
#include <optional>
#include <string>

#include "cobot/planner/actions.hpp"
#include "cobot/robot/wire.hpp"
#include "cobot/sim/world.hpp"

namespace cobot::robot {

/// Simulated seconds per action class. The defaults make one eight-action job take 12 s.
struct CycleModel {
    double transit_s = 3.0;
    double approach_s = 1.25;
    double gripper_s = 0.5;

    double seconds(const planner::RobotAction& action) const;
    double job_seconds(const std::vector<planner::RobotAction>& actions) const;
};

struct RobotSimState {
    Pose pose;
    Gripper gripper = Gripper::Open;
    std::optional<ComponentId> held;
};

struct ActionOutcome {
    bool ok = true;
    double elapsed_s = 0.0;
    std::string reason;  // nack reason when !ok
};

/// Pick-and-place robot acting on a shared world. Closing the gripper within the slot
/// tolerance of a mapped magazine slot picks that slot's component; opening within the
/// tolerance of the delivery pose drops it into the delivery zone.
class RobotSim {
public:
    static constexpr double kSlotToleranceM = 0.001;

    RobotSim(const ComponentCatalog& catalog, planner::MagazineLayout layout, std::shared_ptr<sim::WorldHandle> world,
             CycleModel cycle = {});

    ActionOutcome execute(const planner::RobotAction& action);
    RobotSimState state();
    StatusFrame status(std::int64_t seq);
    /// Restores the initial cell: full magazine, empty delivery zone, robot parked.
    void reset();

    const CycleModel& cycle() const noexcept { return cycle_; }
    const std::shared_ptr<sim::WorldHandle>& world() const noexcept { return world_; }

private:
    std::optional<ComponentId> component_at(const Pose& pose) const;

    const ComponentCatalog& catalog_;
    planner::MagazineLayout layout_;
    std::shared_ptr<sim::WorldHandle> world_;
    CycleModel cycle_;
    Pose pose_;
    Gripper gripper_ = Gripper::Open;
};

}  // namespace cobot::robot
