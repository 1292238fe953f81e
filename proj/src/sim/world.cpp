#include "cobot/sim/world.hpp"

#include <algorithm>
#include <map>

namespace cobot::sim {

WorldState WorldState::initial(const ComponentCatalog& catalog) {
    WorldState w;
    for (ComponentId id : catalog.operator_start_order()) {
        w.assembled.insert(id);
        w.history.push_back(id);
    }
    w.magazine = catalog.deliverable_ids();
    return w;
}

bool WorldState::in_delivery_zone(ComponentId id) const {
    return std::find(delivery_zone.begin(), delivery_zone.end(), id) != delivery_zone.end();
}

void WorldState::remove_from_delivery_zone(ComponentId id) {
    delivery_zone.erase(std::remove(delivery_zone.begin(), delivery_zone.end(), id), delivery_zone.end());
}

bool conserved(const WorldState& world, const ComponentCatalog& catalog) {
    std::map<ComponentId, int> seen;
    for (ComponentId id : world.magazine) ++seen[id];
    for (ComponentId id : world.delivery_zone) ++seen[id];
    if (world.held) ++seen[*world.held];
    for (ComponentId id : world.assembled)
        if (catalog.contains(id) && catalog.at(id).robot_deliverable) ++seen[id];
    for (ComponentId id : catalog.deliverable_ids()) {
        if (seen[id] != 1) return false;
        seen.erase(id);
    }
    if (!seen.empty()) return false;  // stray ids outside the deliverable set
    if (ComponentSet(world.history.begin(), world.history.end()) != world.assembled) return false;
    try {
        return validate_sequence(world.history, catalog).valid;
    } catch (const SequenceError&) {
        return false;
    }
}

SceneSnapshot snapshot(const WorldState& world, bool with_images) {
    SceneSnapshot s{world.assembled, {}, world.clock};
    if (with_images) {
        const std::string ids = format_set(world.assembled, "");
        s.images.push_back({680, 480, llm::Detail::High, "sim://top?assembled=" + ids});
        s.images.push_back({680, 480, llm::Detail::High, "sim://side?assembled=" + ids});
    }
    return s;
}

}  // namespace cobot::sim
