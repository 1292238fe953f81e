#pragma once

#include <mutex>
#include <optional>
#include <vector>

#include "cobot/domain/catalog.hpp"
#include "cobot/sim/scene.hpp"

namespace cobot::sim {

/// Ground truth of the workcell. Every robot-deliverable component sits in exactly one of
/// magazine, delivery zone, the robot gripper (`held`) or the assembly.
struct WorldState {
    ComponentSet assembled;
    ComponentSet magazine;
    /// Delivery zone in arrival order; the operator picks from the front.
    std::vector<ComponentId> delivery_zone;
    std::optional<ComponentId> held;
    /// Assembly order, including the operator's start parts.
    AssemblySequence history;
    double clock = 0.0;

    /// Non-deliverable parts already assembled by the operator; everything else in the magazine.
    static WorldState initial(const ComponentCatalog& catalog);

    bool in_delivery_zone(ComponentId id) const;
    void remove_from_delivery_zone(ComponentId id);
    bool complete(const ComponentCatalog& catalog) const { return assembled == catalog.all_ids(); }

    bool operator==(const WorldState&) const = default;
};

/// True when the regions partition the deliverable set and the history is a valid sequence.
bool conserved(const WorldState& world, const ComponentCatalog& catalog);

/// Camera view of the world. With `with_images`, two symbolic 680x480 top/side images are
/// attached whose references encode the assembled set.
SceneSnapshot snapshot(const WorldState& world, bool with_images = true);

/// Shared, lock-protected world used when a robot simulator and the session loop run in
/// different threads. All access goes through `with`.
class WorldHandle {
public:
    explicit WorldHandle(WorldState initial) : world_(std::move(initial)) {}

    template <typename F>
    auto with(F&& f) {
        std::lock_guard<std::mutex> lock(mutex_);
        return f(world_);
    }
    WorldState copy() {
        std::lock_guard<std::mutex> lock(mutex_);
        return world_;
    }

private:
    std::mutex mutex_;
    WorldState world_;
};

}  // namespace cobot::sim
