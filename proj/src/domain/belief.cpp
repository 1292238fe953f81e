#include "cobot/domain/belief.hpp"

namespace cobot {

BeliefState BeliefState::initial(const ComponentCatalog& catalog) {
    BeliefState b;
    b.avail0 = catalog.all_ids();
    b.avail = b.avail0;
    return b;
}

BeliefState update_avail(BeliefState belief) {
    belief.avail = set_minus(belief.avail0, set_union(belief.det, belief.brought));
    return belief;
}

}  // namespace cobot
