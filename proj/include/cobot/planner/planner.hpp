#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "cobot/domain/belief.hpp"
#include "cobot/llm/chat_client.hpp"
#include "cobot/llm/prompt_bundle.hpp"

namespace cobot::planner {

enum class Policy { Reference, Llm };
const char* to_string(Policy p);

struct PlanDecision {
    std::optional<ComponentId> next;
    std::string rationale;
    Policy policy = Policy::Reference;
    /// Set when an LLM choice was rejected and the reference policy decided instead.
    bool overridden = false;

    bool operator==(const PlanDecision&) const = default;
};

/// Lowest-id component that is still available, robot-deliverable, and whose
/// prerequisites are all detected as assembled.
PlanDecision plan_next_reference(const BeliefState& belief, const ComponentCatalog& catalog);

/// Text-only planner prompt with the detected, brought and full component sets
/// substituted into the {detected}, {brought} and {available} slots.
llm::PromptBundle build_planner_prompt(const BeliefState& belief, const ComponentCatalog& catalog);

class PlanError : public std::runtime_error {
public:
    enum class Kind { NoIdFound, InfeasibleChoice, NotAvailable };
    PlanError(Kind kind, ComponentId id, ComponentSet missing, const std::string& what)
        : std::runtime_error(what), kind_(kind), id_(id), missing_(std::move(missing)) {}
    Kind kind() const noexcept { return kind_; }
    ComponentId id() const noexcept { return id_; }
    const ComponentSet& missing() const noexcept { return missing_; }

private:
    Kind kind_;
    ComponentId id_;
    ComponentSet missing_;
};

/// Extracts one component id and checks it against the same rule as the reference policy.
PlanDecision parse_planner_response(const std::string& text, const BeliefState& belief,
                                    const ComponentCatalog& catalog);

class Planner {
public:
    virtual ~Planner() = default;
    virtual Policy policy() const = 0;
    virtual PlanDecision plan(const BeliefState& belief) = 0;
};

class ReferencePlanner final : public Planner {
public:
    explicit ReferencePlanner(const ComponentCatalog& catalog) : catalog_(catalog) {}
    Policy policy() const override { return Policy::Reference; }
    PlanDecision plan(const BeliefState& belief) override { return plan_next_reference(belief, catalog_); }

private:
    const ComponentCatalog& catalog_;
};

/// Asks a chat model for the next component. Backend failures and rejected choices fall
/// back to the reference policy for that step and are flagged as overrides.
class LlmPlanner final : public Planner {
public:
    LlmPlanner(const ComponentCatalog& catalog, std::shared_ptr<llm::ChatClient> client, std::string model);
    Policy policy() const override { return Policy::Llm; }
    PlanDecision plan(const BeliefState& belief) override;

private:
    const ComponentCatalog& catalog_;
    std::shared_ptr<llm::ChatClient> client_;
    std::string model_;
};

}  // namespace cobot::planner
