#include "cobot/sim/operator.hpp"

#include <nlohmann/json.hpp>

namespace cobot::sim {

const char* to_string(OperatorKind k) {
    switch (k) {
        case OperatorKind::Compliant: return "compliant";
        case OperatorKind::DeviateScript: return "deviate_script";
        case OperatorKind::SeededRandom: return "seeded_random";
    }
    return "?";
}

OperatorKind operator_kind_from_string(const std::string& s) {
    if (s == "compliant") return OperatorKind::Compliant;
    if (s == "deviate_script") return OperatorKind::DeviateScript;
    if (s == "seeded_random") return OperatorKind::SeededRandom;
    throw std::invalid_argument("unknown operator kind '" + s + "'");
}

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::Assembled: return "assembled";
        case EventKind::Rejected: return "rejected";
        case EventKind::NoOp: return "no_op";
    }
    return "?";
}

const char* to_string(PartSource s) { return s == PartSource::DeliveryZone ? "delivery_zone" : "magazine"; }

void OperatorPolicy::validate(const ComponentCatalog& catalog) const {
    for (const auto& e : script) {
        if (!catalog.contains(e.component))
            throw std::invalid_argument("scripted component " + std::to_string(e.component) + " is not in the catalog");
        if (e.step < 1) throw std::invalid_argument("script steps start at 1");
    }
    if (deviation_probability < 0 || deviation_probability > 1)
        throw std::invalid_argument("deviation probability must be in [0, 1]");
}

OperatorPolicy OperatorPolicy::from_json(const nlohmann::json& j) {
    OperatorPolicy p;
    p.kind = operator_kind_from_string(j.value("kind", std::string("compliant")));
    for (const auto& e : j.value("script", nlohmann::json::array()))
        p.script.push_back({e.at("step").get<int>(), e.at("component").get<int>()});
    p.seed = j.value("seed", std::uint64_t{0});
    p.deviation_probability = j.value("deviation_probability", 0.0);
    return p;
}

nlohmann::json OperatorPolicy::to_json() const {
    nlohmann::json script_json = nlohmann::json::array();
    for (const auto& e : script) script_json.push_back({{"step", e.step}, {"component", e.component}});
    return {{"kind", sim::to_string(kind)}, {"script", script_json}, {"seed", seed},
            {"deviation_probability", deviation_probability}};
}

nlohmann::json OperatorEvent::to_json() const {
    nlohmann::json j{{"kind", sim::to_string(kind)}, {"deviation", deviation}, {"reason", reason}};
    j["component"] = component ? nlohmann::json(*component) : nlohmann::json(nullptr);
    j["source"] = sim::to_string(source);
    return j;
}

OperatorEvent attempt_assembly(WorldState& world, ComponentId id, PartSource source, const ComponentCatalog& catalog) {
    OperatorEvent ev{EventKind::Rejected, id, source, false, {}};
    const bool present = source == PartSource::DeliveryZone ? world.in_delivery_zone(id) : world.magazine.count(id) > 0;
    if (!present) {
        ev.kind = EventKind::NoOp;
        ev.reason = "component " + std::to_string(id) + " is not in the " + to_string(source);
        return ev;
    }
    auto missing = set_minus(catalog.prerequisites(id), world.assembled);
    if (!missing.empty()) {
        ev.reason = "component " + std::to_string(id) + " needs " + format_set(missing) + " first";
        return ev;
    }
    if (source == PartSource::DeliveryZone)
        world.remove_from_delivery_zone(id);
    else
        world.magazine.erase(id);
    world.assembled.insert(id);
    world.history.push_back(id);
    ev.kind = EventKind::Assembled;
    return ev;
}

namespace {

OperatorEvent mark(OperatorEvent ev, std::optional<ComponentId> recommendation) {
    ev.deviation = ev.component && (ev.source == PartSource::Magazine || ev.component != recommendation);
    return ev;
}

}  // namespace

OperatorEvent compliant_act(WorldState& world, std::optional<ComponentId> recommendation,
                            const ComponentCatalog& catalog) {
    if (world.delivery_zone.empty()) return {EventKind::NoOp, std::nullopt, PartSource::DeliveryZone, false, "delivery zone is empty"};
    for (ComponentId id : world.delivery_zone) {
        if (is_subset(catalog.prerequisites(id), world.assembled))
            return mark(attempt_assembly(world, id, PartSource::DeliveryZone, catalog), recommendation);
    }
    return mark(attempt_assembly(world, world.delivery_zone.front(), PartSource::DeliveryZone, catalog), recommendation);
}

SimulatedOperator::SimulatedOperator(OperatorPolicy policy)
    : policy_(std::move(policy)) {
    reset(0);
}

void SimulatedOperator::reset(std::uint64_t seed) {
    fired_.assign(policy_.script.size(), false);
    std::seed_seq seq{static_cast<std::uint32_t>(policy_.seed), static_cast<std::uint32_t>(policy_.seed >> 32),
                      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    rng_.seed(seq);
}

OperatorEvent SimulatedOperator::act(WorldState& world, std::optional<ComponentId> recommendation,
                                     const ComponentCatalog& catalog) {
    switch (policy_.kind) {
        case OperatorKind::Compliant:
            break;
        case OperatorKind::DeviateScript: {
            const int step = static_cast<int>(world.assembled.size()) + 1;
            for (std::size_t i = 0; i < policy_.script.size(); ++i) {
                if (fired_[i] || policy_.script[i].step != step) continue;
                fired_[i] = true;
                const ComponentId id = policy_.script[i].component;
                if (world.in_delivery_zone(id))
                    return mark(attempt_assembly(world, id, PartSource::DeliveryZone, catalog), recommendation);
                if (world.magazine.count(id))
                    return mark(attempt_assembly(world, id, PartSource::Magazine, catalog), recommendation);
                // Scripted part already used up: behave compliantly.
            }
            break;
        }
        case OperatorKind::SeededRandom: {
            // Both draws happen every turn so the stream does not depend on world state.
            const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
            const std::uint64_t pick = rng_();
            if (u < policy_.deviation_probability && !world.magazine.empty()) {
                auto it = world.magazine.begin();
                std::advance(it, static_cast<long>(pick % world.magazine.size()));
                return mark(attempt_assembly(world, *it, PartSource::Magazine, catalog), recommendation);
            }
            break;
        }
    }
    return compliant_act(world, recommendation, catalog);
}

}  // namespace cobot::sim
