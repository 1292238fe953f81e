#include "cobot/planner/planner.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace cobot::planner {

namespace {

constexpr const char* kSystemText =
    "You are the planning module of a robot-assisted assembly cell. A human operator assembles the product; "
    "a robot arm brings the components from a magazine to the operator one at a time.\n"
    "A component can only be mounted after all of the components it requires are mounted.\n"
    "Component list (number, name, required components):\n";

constexpr const char* kUserTemplate =
    "Components already mounted on the assembly: {detected}\n"
    "Components the robot has already brought: {brought}\n"
    "All components of the product: {available}\n"
    "Choose exactly one component the robot should bring next. It must not be mounted or already brought, "
    "the robot must be able to deliver it, and every component it requires must already be mounted.\n"
    "Reply with 'Bring component <number>.' on the first line and 'Pick-and-place: magazine -> operator.' on the "
    "second line. If no component can be brought, reply 'done'.";

constexpr const char* kDoneTemplate =
    "Components already mounted on the assembly: {detected}\n"
    "Components the robot has already brought: {brought}\n"
    "All components of the product: {available}\n"
    "Every component is either mounted or already brought. Reply 'done'.";

constexpr const char* kAssistantExample = "Bring component 3.\nPick-and-place: magazine -> operator.";

std::string substitute(std::string text, const std::string& key, const std::string& value) {
    const std::string slot = "{" + key + "}";
    for (auto p = text.find(slot); p != std::string::npos; p = text.find(slot, p + value.size()))
        text.replace(p, slot.size(), value);
    return text;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool has_word(const std::string& s, const std::string& word) {
    for (auto p = s.find(word); p != std::string::npos; p = s.find(word, p + 1)) {
        const bool left = p == 0 || !is_word_char(s[p - 1]);
        const bool right = p + word.size() >= s.size() || !is_word_char(s[p + word.size()]);
        if (left && right) return true;
    }
    return false;
}

std::optional<int> read_int_at(const std::string& s, std::size_t pos) {
    std::size_t end = pos;
    while (end < s.size() && std::isdigit(static_cast<unsigned char>(s[end]))) ++end;
    if (end == pos || end - pos > 6) return std::nullopt;
    return std::stoi(s.substr(pos, end - pos));
}

// "component 7", "component #7", "component no. 7" first; otherwise the first standalone integer.
std::optional<int> extract_id(const std::string& lower) {
    for (auto p = lower.find("component"); p != std::string::npos; p = lower.find("component", p + 1)) {
        std::size_t q = p + 9;
        if (q < lower.size() && lower[q] == 's') ++q;
        while (q < lower.size() && (lower[q] == ' ' || lower[q] == '#' || lower[q] == ':')) ++q;
        if (lower.compare(q, 3, "no.") == 0) q += 3;
        while (q < lower.size() && lower[q] == ' ') ++q;
        if (auto v = read_int_at(lower, q)) return v;
    }
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(lower[i]))) continue;
        if (i > 0 && (std::isalpha(static_cast<unsigned char>(lower[i - 1])) || std::isdigit(static_cast<unsigned char>(lower[i - 1]))))
            continue;
        return read_int_at(lower, i);
    }
    return std::nullopt;
}

}  // namespace

const char* to_string(Policy p) { return p == Policy::Reference ? "reference" : "llm"; }

PlanDecision plan_next_reference(const BeliefState& belief, const ComponentCatalog& catalog) {
    for (ComponentId id : belief.avail) {
        const auto& spec = catalog.at(id);
        if (spec.robot_deliverable && is_subset(spec.prerequisites, belief.det)) {
            return {id, "lowest-id available component with all prerequisites detected", Policy::Reference, false};
        }
    }
    return {std::nullopt,
            belief.avail.empty() ? "nothing left to deliver" : "no available component has its prerequisites detected",
            Policy::Reference, false};
}

llm::PromptBundle build_planner_prompt(const BeliefState& belief, const ComponentCatalog& catalog) {
    llm::PromptBundle bundle;
    std::ostringstream sys;
    sys << kSystemText;
    for (const auto& c : catalog.components()) {
        sys << c.id << " (" << c.name << "): requires " << format_set(c.prerequisites) << "; "
            << (c.robot_deliverable ? "robot can deliver" : "operator places it") << "\n";
    }
    bundle.system_text = sys.str();
    bundle.assistant_example = kAssistantExample;

    std::string user = belief.avail.empty() ? kDoneTemplate : kUserTemplate;
    user = substitute(user, "detected", format_set(belief.det));
    user = substitute(user, "brought", format_set(belief.brought));
    user = substitute(user, "available", format_set(belief.avail0));
    bundle.user_items.push_back({user, {}});
    return bundle;
}

PlanDecision parse_planner_response(const std::string& text, const BeliefState& belief,
                                    const ComponentCatalog& catalog) {
    std::string lower = text;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });

    auto id = extract_id(lower);
    if (!id) {
        if (has_word(lower, "done") && belief.avail.empty())
            return {std::nullopt, "model reported nothing left", Policy::Llm, false};
        throw PlanError(PlanError::Kind::NoIdFound, 0, {}, "no component id in planner reply");
    }
    if (!catalog.contains(*id) || !belief.avail.count(*id))
        throw PlanError(PlanError::Kind::NotAvailable, *id, {}, "component " + std::to_string(*id) + " is not available");
    if (!catalog.at(*id).robot_deliverable)
        throw PlanError(PlanError::Kind::NotAvailable, *id, {},
                        "component " + std::to_string(*id) + " is not robot-deliverable");
    auto missing = set_minus(catalog.prerequisites(*id), belief.det);
    if (!missing.empty()) {
        throw PlanError(PlanError::Kind::InfeasibleChoice, *id, missing,
                        "component " + std::to_string(*id) + " still needs " + format_set(missing));
    }
    return {*id, text, Policy::Llm, false};
}

LlmPlanner::LlmPlanner(const ComponentCatalog& catalog, std::shared_ptr<llm::ChatClient> client, std::string model)
    : catalog_(catalog), client_(std::move(client)), model_(std::move(model)) {}

PlanDecision LlmPlanner::plan(const BeliefState& belief) {
    std::string reason;
    try {
        auto reply = client_->complete(llm::to_chat_request(build_planner_prompt(belief, catalog_), model_));
        return parse_planner_response(reply.content, belief, catalog_);
    } catch (const PlanError& e) {
        reason = e.what();
    } catch (const llm::BackendError& e) {
        reason = e.what();
    }
    auto fallback = plan_next_reference(belief, catalog_);
    fallback.overridden = true;
    fallback.rationale = "llm planner overridden (" + reason + "); " + fallback.rationale;
    return fallback;
}

}  // namespace cobot::planner
