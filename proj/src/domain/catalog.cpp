#include "cobot/domain/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cobot {

namespace {

std::string join_ids(const std::vector<ComponentId>& ids) {
    std::ostringstream out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out << ", ";
        out << ids[i];
    }
    return out.str();
}

[[noreturn]] void fail(CatalogError::Kind kind, std::vector<ComponentId> ids, const std::string& msg) {
    throw CatalogError(kind, ids, msg + (ids.empty() ? "" : " [" + join_ids(ids) + "]"));
}

// Returns one cycle of the precedence graph (edges component -> prerequisite), or empty.
std::vector<ComponentId> find_cycle(const std::vector<ComponentSpec>& comps) {
    const std::size_t n = comps.size();
    enum Color : unsigned char { White, Grey, Black };
    std::vector<Color> color(n + 1, White);
    std::vector<ComponentId> stack;

    std::vector<ComponentId> cycle;
    auto dfs = [&](auto&& self, ComponentId v) -> bool {
        color[v] = Grey;
        stack.push_back(v);
        for (ComponentId p : comps[v - 1].prerequisites) {
            if (color[p] == Grey) {
                auto it = std::find(stack.begin(), stack.end(), p);
                cycle.assign(it, stack.end());
                return true;
            }
            if (color[p] == White && self(self, p)) return true;
        }
        stack.pop_back();
        color[v] = Black;
        return false;
    };
    for (ComponentId v = 1; v <= static_cast<ComponentId>(n); ++v) {
        if (color[v] == White && dfs(dfs, v)) {
            std::sort(cycle.begin(), cycle.end());
            return cycle;
        }
    }
    return {};
}

}  // namespace

ComponentSet set_union(const ComponentSet& a, const ComponentSet& b) {
    ComponentSet out = a;
    out.insert(b.begin(), b.end());
    return out;
}

ComponentSet set_minus(const ComponentSet& a, const ComponentSet& b) {
    ComponentSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
    return out;
}

bool is_subset(const ComponentSet& sub, const ComponentSet& super) {
    return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

std::string format_set(const ComponentSet& s, std::string_view empty) {
    if (s.empty()) return std::string(empty);
    return join_ids({s.begin(), s.end()});
}

CatalogError::CatalogError(Kind kind, std::vector<ComponentId> ids, const std::string& what)
    : std::runtime_error(what), kind_(kind), ids_(std::move(ids)) {}

ComponentCatalog::ComponentCatalog(std::vector<ComponentSpec> components,
                                   std::optional<std::string> catalog_image)
    : components_(std::move(components)), catalog_image_(std::move(catalog_image)) {
    if (components_.empty()) fail(CatalogError::Kind::EmptyCatalog, {}, "catalog has no components");

    std::map<ComponentId, int> seen;
    for (const auto& c : components_) ++seen[c.id];
    std::vector<ComponentId> dups;
    for (auto [id, count] : seen)
        if (count > 1) dups.push_back(id);
    if (!dups.empty()) fail(CatalogError::Kind::DuplicateId, dups, "duplicate component ids");

    const auto n = static_cast<ComponentId>(components_.size());
    std::vector<ComponentId> out_of_range;
    for (auto [id, count] : seen)
        if (id < 1 || id > n) out_of_range.push_back(id);
    if (!out_of_range.empty())
        fail(CatalogError::Kind::Schema, out_of_range, "component ids must be exactly 1.." + std::to_string(n));

    std::sort(components_.begin(), components_.end(),
              [](const ComponentSpec& a, const ComponentSpec& b) { return a.id < b.id; });

    std::vector<ComponentId> unknown;
    for (const auto& c : components_) {
        for (ComponentId p : c.prerequisites) {
            if (p < 1 || p > n) unknown.push_back(p);
        }
        if (c.prerequisites.count(c.id)) fail(CatalogError::Kind::CyclicPrecedence, {c.id}, "component requires itself");
    }
    if (!unknown.empty()) {
        std::sort(unknown.begin(), unknown.end());
        unknown.erase(std::unique(unknown.begin(), unknown.end()), unknown.end());
        fail(CatalogError::Kind::UnknownPrerequisite, unknown, "prerequisites reference unknown ids");
    }

    if (auto cycle = find_cycle(components_); !cycle.empty())
        fail(CatalogError::Kind::CyclicPrecedence, cycle, "precedence relation has a cycle");

    // Acyclic and non-empty already implies a root exists; kept as an explicit check.
    bool has_root = std::any_of(components_.begin(), components_.end(),
                                [](const ComponentSpec& c) { return c.prerequisites.empty(); });
    if (!has_root) fail(CatalogError::Kind::CyclicPrecedence, {}, "no component without prerequisites");
}

bool ComponentCatalog::contains(ComponentId id) const noexcept {
    return id >= 1 && id <= static_cast<ComponentId>(components_.size());
}

const ComponentSpec& ComponentCatalog::at(ComponentId id) const {
    if (!contains(id)) fail(CatalogError::Kind::UnknownComponent, {id}, "unknown component");
    return components_[static_cast<std::size_t>(id - 1)];
}

ComponentSet ComponentCatalog::all_ids() const {
    ComponentSet s;
    for (const auto& c : components_) s.insert(s.end(), c.id);
    return s;
}

ComponentSet ComponentCatalog::deliverable_ids() const {
    ComponentSet s;
    for (const auto& c : components_)
        if (c.robot_deliverable) s.insert(s.end(), c.id);
    return s;
}

ComponentSet ComponentCatalog::non_deliverable_ids() const {
    return set_minus(all_ids(), deliverable_ids());
}

std::vector<ComponentId> ComponentCatalog::operator_start_order() const {
    std::vector<ComponentId> order;
    ComponentSet placed;
    ComponentSet pending = non_deliverable_ids();
    bool moved = true;
    while (!pending.empty() && moved) {
        moved = false;
        for (ComponentId id : pending) {
            if (is_subset(prerequisites(id), placed)) {
                order.push_back(id);
                placed.insert(id);
                pending.erase(id);
                moved = true;
                break;
            }
        }
    }
    return order;
}

ComponentCatalog parse_catalog(std::string_view json_text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(CatalogError::Kind::Schema, {}, std::string("catalog is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) fail(CatalogError::Kind::Schema, {}, "catalog document must be an object");
    for (const auto& [key, _] : doc.items()) {
        if (key != "components" && key != "catalog_image")
            fail(CatalogError::Kind::Schema, {}, "unknown top-level field '" + key + "'");
    }
    if (!doc.contains("components") || !doc["components"].is_array())
        fail(CatalogError::Kind::Schema, {}, "catalog requires a 'components' array");

    static const std::set<std::string> known = {"id", "name", "description", "prerequisites",
                                                "robot_deliverable", "magazine_slot"};
    std::vector<ComponentSpec> specs;
    for (const auto& item : doc["components"]) {
        if (!item.is_object()) fail(CatalogError::Kind::Schema, {}, "component entries must be objects");
        for (const auto& [key, _] : item.items()) {
            if (!known.count(key)) fail(CatalogError::Kind::Schema, {}, "unknown component field '" + key + "'");
        }
        try {
            ComponentSpec spec;
            spec.id = item.at("id").get<int>();
            spec.name = item.at("name").get<std::string>();
            spec.description = item.value("description", std::string{});
            for (const auto& p : item.at("prerequisites")) spec.prerequisites.insert(p.get<int>());
            spec.robot_deliverable = item.value("robot_deliverable", true);
            if (item.contains("magazine_slot") && !item["magazine_slot"].is_null())
                spec.magazine_slot = item["magazine_slot"].get<int>();
            specs.push_back(std::move(spec));
        } catch (const json::exception& e) {
            fail(CatalogError::Kind::Schema, {}, std::string("malformed component entry: ") + e.what());
        }
    }
    std::optional<std::string> image;
    if (doc.contains("catalog_image") && doc["catalog_image"].is_string())
        image = doc["catalog_image"].get<std::string>();
    return ComponentCatalog(std::move(specs), std::move(image));
}

ComponentCatalog load_catalog(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(CatalogError::Kind::Schema, {}, "cannot open catalog file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_catalog(buf.str());
}

ComponentSet feasible_set(const ComponentSet& assembled, const ComponentCatalog& catalog) {
    std::vector<ComponentId> unknown;
    for (ComponentId id : assembled)
        if (!catalog.contains(id)) unknown.push_back(id);
    if (!unknown.empty()) fail(CatalogError::Kind::UnknownComponent, unknown, "assembled set has unknown ids");

    ComponentSet out;
    for (const auto& c : catalog.components()) {
        if (!assembled.count(c.id) && is_subset(c.prerequisites, assembled)) out.insert(out.end(), c.id);
    }
    return out;
}

SequenceVerdict validate_sequence(const AssemblySequence& seq, const ComponentCatalog& catalog) {
    ComponentSet seen;
    for (ComponentId id : seq) {
        if (!catalog.contains(id)) throw SequenceError(id, "component " + std::to_string(id) + " not in catalog");
        if (!seen.insert(id).second)
            throw SequenceError(id, "component " + std::to_string(id) + " appears twice in sequence");
    }

    ComponentSet before;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        auto missing = set_minus(catalog.prerequisites(seq[i]), before);
        if (!missing.empty()) return {false, i, std::move(missing)};
        before.insert(seq[i]);
    }
    return SequenceVerdict::ok();
}

AssemblySequence parse_sequence(std::string_view dashed) {
    AssemblySequence seq;
    std::size_t pos = 0;
    while (pos <= dashed.size()) {
        auto next = dashed.find('-', pos);
        auto token = dashed.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
        int value = 0;
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc{} || ptr != token.data() + token.size())
            throw std::invalid_argument("bad assembly sequence '" + std::string(dashed) + "'");
        seq.push_back(value);
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return seq;
}

std::string format_sequence(const AssemblySequence& seq) {
    std::string out;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (i) out += '-';
        out += std::to_string(seq[i]);
    }
    return out;
}

}  // namespace cobot
