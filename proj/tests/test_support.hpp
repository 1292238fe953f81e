#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "cobot/domain/catalog.hpp"

namespace cobot::testing {

inline std::filesystem::path data_path(const std::string& rel) { return std::filesystem::path(COBOT_DATA_DIR) / rel; }
inline std::filesystem::path fixture_path(const std::string& rel) {
    return std::filesystem::path(COBOT_FIXTURE_DIR) / rel;
}
inline std::filesystem::path golden_path(const std::string& rel) {
    return std::filesystem::path(COBOT_GOLDEN_DIR) / rel;
}

inline const ComponentCatalog& default_catalog() {
    static const ComponentCatalog catalog = load_catalog(data_path("default_catalog.json"));
    return catalog;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Compares against a frozen golden file. Set COBOT_UPDATE_GOLDEN=1 to rewrite.
inline bool matches_golden(const std::string& name, const std::string& actual) {
    auto path = golden_path(name);
    if (const char* env = std::getenv("COBOT_UPDATE_GOLDEN"); env && std::string(env) == "1") {
        std::ofstream(path, std::ios::binary) << actual;
        return true;
    }
    return std::filesystem::exists(path) && read_file(path) == actual;
}

/// Random DAG catalog: each component may only require lower ids, so it is acyclic by
/// construction and component 1 is always a root.
inline ComponentCatalog random_catalog(std::mt19937_64& rng, int n, double edge_p = 0.3) {
    std::bernoulli_distribution edge(edge_p);
    std::vector<ComponentSpec> specs;
    for (int id = 1; id <= n; ++id) {
        ComponentSpec s;
        s.id = id;
        s.name = "part" + std::to_string(id);
        for (int p = 1; p < id; ++p)
            if (edge(rng)) s.prerequisites.insert(p);
        s.magazine_slot = id;
        specs.push_back(s);
    }
    return ComponentCatalog(std::move(specs));
}

inline ComponentSet subset_from_mask(unsigned mask, int n) {
    ComponentSet s;
    for (int i = 0; i < n; ++i)
        if (mask & (1u << i)) s.insert(i + 1);
    return s;
}

}  // namespace cobot::testing
