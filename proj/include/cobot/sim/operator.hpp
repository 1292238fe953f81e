#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cobot/sim/world.hpp"

namespace cobot::sim {

enum class OperatorKind { Compliant, DeviateScript, SeededRandom };
const char* to_string(OperatorKind k);
OperatorKind operator_kind_from_string(const std::string& s);

/// At assembly position `step` (1-based, counting the operator's start parts) the operator
/// assembles `component` instead of following the robot.
struct ScriptEntry {
    int step = 0;
    ComponentId component = 0;
    bool operator==(const ScriptEntry&) const = default;
};

struct OperatorPolicy {
    OperatorKind kind = OperatorKind::Compliant;
    std::vector<ScriptEntry> script;
    std::uint64_t seed = 0;
    /// seeded_random only: chance per action of grabbing a random magazine part.
    double deviation_probability = 0.0;

    /// Throws std::invalid_argument when scripted ids are not in the catalog.
    void validate(const ComponentCatalog& catalog) const;

    static OperatorPolicy from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

enum class EventKind { Assembled, Rejected, NoOp };
enum class PartSource { DeliveryZone, Magazine };
const char* to_string(EventKind k);
const char* to_string(PartSource s);

struct OperatorEvent {
    EventKind kind = EventKind::NoOp;
    std::optional<ComponentId> component;
    PartSource source = PartSource::DeliveryZone;
    /// The operator chose something other than the robot's recommendation.
    bool deviation = false;
    std::string reason;

    nlohmann::json to_json() const;
};

/// Takes `id` from `source` and mounts it if its prerequisites are assembled. A rejected
/// attempt returns the part where it came from and leaves the world unchanged.
OperatorEvent attempt_assembly(WorldState& world, ComponentId id, PartSource source, const ComponentCatalog& catalog);

class Operator {
public:
    virtual ~Operator() = default;
    /// Starts a new session; simulated operators mix `seed` with their policy seed.
    virtual void reset(std::uint64_t /*seed*/) {}
    /// One operator turn after the robot delivered `recommendation` (if any).
    virtual OperatorEvent act(WorldState& world, std::optional<ComponentId> recommendation,
                              const ComponentCatalog& catalog) = 0;
};

/// Compliant behaviour: mount the first part in the delivery zone that fits; if none fits,
/// try the oldest one (and get rejected); with an empty zone, wait.
OperatorEvent compliant_act(WorldState& world, std::optional<ComponentId> recommendation,
                            const ComponentCatalog& catalog);

class SimulatedOperator final : public Operator {
public:
    explicit SimulatedOperator(OperatorPolicy policy);
    void reset(std::uint64_t seed) override;
    OperatorEvent act(WorldState& world, std::optional<ComponentId> recommendation,
                      const ComponentCatalog& catalog) override;
    const OperatorPolicy& policy() const noexcept { return policy_; }

private:
    OperatorPolicy policy_;
    std::vector<bool> fired_;
    std::mt19937_64 rng_;
};

}  // namespace cobot::sim
