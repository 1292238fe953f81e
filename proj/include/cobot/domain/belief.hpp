#pragma once

#include "cobot/domain/catalog.hpp"

namespace cobot {

/// The orchestrator's view of the assembly: what the detector reported as assembled,
/// what the robot already delivered, and what is left to handle.
struct BeliefState {
    ComponentSet det;
    ComponentSet brought;
    ComponentSet avail;
    ComponentSet avail0;

    static BeliefState initial(const ComponentCatalog& catalog);

    bool operator==(const BeliefState&) const = default;
};

/// avail = avail0 - (det ∪ brought); other fields untouched.
BeliefState update_avail(BeliefState belief);

}  // namespace cobot
