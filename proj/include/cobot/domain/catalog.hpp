#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cobot {

/// Component numbers are 1-based and dense within a catalog.
using ComponentId = int;
using ComponentSet = std::set<ComponentId>;

ComponentSet set_union(const ComponentSet& a, const ComponentSet& b);
ComponentSet set_minus(const ComponentSet& a, const ComponentSet& b);
bool is_subset(const ComponentSet& sub, const ComponentSet& super);
std::string format_set(const ComponentSet& s, std::string_view empty = "none");

struct ComponentSpec {
    ComponentId id = 0;
    std::string name;
    std::string description;
    ComponentSet prerequisites;
    bool robot_deliverable = true;
    std::optional<int> magazine_slot;
};

class CatalogError : public std::runtime_error {
public:
    enum class Kind { DuplicateId, UnknownPrerequisite, CyclicPrecedence, EmptyCatalog, Schema, UnknownComponent };

    CatalogError(Kind kind, std::vector<ComponentId> ids, const std::string& what);

    Kind kind() const noexcept { return kind_; }
    const std::vector<ComponentId>& ids() const noexcept { return ids_; }

private:
    Kind kind_;
    std::vector<ComponentId> ids_;
};

/// Validated component list with its precedence relation.
///
/// Construction enforces: ids are exactly 1..n, prerequisites reference known ids and
/// never the component itself, the precedence graph is acyclic, and at least one
/// component is a root. A constructed catalog is immutable.
class ComponentCatalog {
public:
    explicit ComponentCatalog(std::vector<ComponentSpec> components,
                              std::optional<std::string> catalog_image = std::nullopt);

    std::size_t size() const noexcept { return components_.size(); }
    const std::vector<ComponentSpec>& components() const noexcept { return components_; }
    const std::optional<std::string>& catalog_image() const noexcept { return catalog_image_; }

    bool contains(ComponentId id) const noexcept;
    /// Throws CatalogError{UnknownComponent} for ids outside 1..n.
    const ComponentSpec& at(ComponentId id) const;
    const ComponentSet& prerequisites(ComponentId id) const { return at(id).prerequisites; }

    ComponentSet all_ids() const;
    ComponentSet deliverable_ids() const;
    ComponentSet non_deliverable_ids() const;

    /// Non-deliverable components in a precedence-respecting order (the parts the
    /// operator places before the first robot delivery).
    std::vector<ComponentId> operator_start_order() const;

private:
    std::vector<ComponentSpec> components_;
    std::optional<std::string> catalog_image_;
};

ComponentCatalog parse_catalog(std::string_view json_text);
ComponentCatalog load_catalog(const std::filesystem::path& path);

/// Components not yet in `assembled` whose prerequisites are all in `assembled`.
ComponentSet feasible_set(const ComponentSet& assembled, const ComponentCatalog& catalog);

using AssemblySequence = std::vector<ComponentId>;

struct SequenceVerdict {
    bool valid = true;
    std::size_t violating_index = 0;
    ComponentSet missing;

    static SequenceVerdict ok() { return {}; }
};

class SequenceError : public std::invalid_argument {
public:
    SequenceError(ComponentId id, const std::string& what) : std::invalid_argument(what), id_(id) {}
    ComponentId id() const noexcept { return id_; }

private:
    ComponentId id_;
};

/// Valid iff every element's prerequisites appear earlier. Reports the first violation.
/// Throws SequenceError on duplicates or ids outside the catalog.
SequenceVerdict validate_sequence(const AssemblySequence& seq, const ComponentCatalog& catalog);

AssemblySequence parse_sequence(std::string_view dashed);  // "1-2-3-4"
std::string format_sequence(const AssemblySequence& seq);

}  // namespace cobot
