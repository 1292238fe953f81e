#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <map>
#include <random>

#include <nlohmann/json.hpp>

#include "cobot/domain/belief.hpp"
#include "cobot/domain/catalog.hpp"
#include "test_support.hpp"

using namespace cobot;
using cobot::testing::default_catalog;

namespace {

// Independent reading of the catalog file: raw prerequisite lists straight from JSON.
std::map<int, std::vector<int>> raw_prereqs() {
    auto doc = nlohmann::json::parse(cobot::testing::read_file(cobot::testing::data_path("default_catalog.json")));
    std::map<int, std::vector<int>> out;
    for (const auto& c : doc["components"]) out[c["id"].get<int>()] = c["prerequisites"].get<std::vector<int>>();
    return out;
}

// Brute force: first index whose prerequisites are not all among earlier elements.
std::pair<int, std::vector<int>> brute_first_violation(const std::vector<int>& seq) {
    auto pre = raw_prereqs();
    for (std::size_t k = 0; k < seq.size(); ++k) {
        std::vector<int> missing;
        for (int p : pre[seq[k]]) {
            bool found = false;
            for (std::size_t j = 0; j < k; ++j) found = found || seq[j] == p;
            if (!found) missing.push_back(p);
        }
        if (!missing.empty()) return {static_cast<int>(k), missing};
    }
    return {-1, {}};
}

CatalogError::Kind kind_of(const std::string& json) {
    try {
        parse_catalog(json);
    } catch (const CatalogError& e) {
        return e.kind();
    }
    FAIL("expected CatalogError");
    return CatalogError::Kind::Schema;
}

}  // namespace

TEST_CASE("default catalog loads with chassis at 7") {
    const auto& cat = default_catalog();
    CHECK(cat.size() == 9);
    CHECK(cat.all_ids() == ComponentSet{1, 2, 3, 4, 5, 6, 7, 8, 9});
    CHECK(cat.at(7).name == "chassis");
    CHECK(cat.deliverable_ids() == ComponentSet{3, 4, 5, 6, 7, 8, 9});
    CHECK(cat.operator_start_order() == std::vector<ComponentId>{1, 2});
}

TEST_CASE("catalog validation errors name the offending ids") {
    CHECK(parse_catalog(R"({"components":[{"id":1,"name":"a","prerequisites":[]}]})").size() == 1);

    try {
        parse_catalog(R"({"components":[{"id":1,"name":"a","prerequisites":[2]},
                                        {"id":2,"name":"b","prerequisites":[1]}]})");
        FAIL("cycle not detected");
    } catch (const CatalogError& e) {
        CHECK(e.kind() == CatalogError::Kind::CyclicPrecedence);
        CHECK(e.ids() == std::vector<ComponentId>{1, 2});
    }

    try {
        parse_catalog(R"({"components":[{"id":1,"name":"a","prerequisites":[]},
                                        {"id":1,"name":"b","prerequisites":[]}]})");
        FAIL("duplicate not detected");
    } catch (const CatalogError& e) {
        CHECK(e.kind() == CatalogError::Kind::DuplicateId);
        CHECK(e.ids() == std::vector<ComponentId>{1});
    }

    try {
        parse_catalog(R"({"components":[{"id":1,"name":"a","prerequisites":[4]},
                                        {"id":2,"name":"b","prerequisites":[]}]})");
        FAIL("unknown prerequisite not detected");
    } catch (const CatalogError& e) {
        CHECK(e.kind() == CatalogError::Kind::UnknownPrerequisite);
        CHECK(e.ids() == std::vector<ComponentId>{4});
    }

    CHECK(kind_of(R"({"components":[]})") == CatalogError::Kind::EmptyCatalog);
    CHECK(kind_of(R"({"components":[{"id":1,"name":"a","prerequisites":[1]}]})") ==
          CatalogError::Kind::CyclicPrecedence);
    CHECK(kind_of(R"({"components":[{"id":1,"name":"a","prerequisites":[],"colour":"red"}]})") ==
          CatalogError::Kind::Schema);
    CHECK(kind_of(R"({"components":[{"id":2,"name":"a","prerequisites":[]}]})") == CatalogError::Kind::Schema);
    CHECK(kind_of("not json") == CatalogError::Kind::Schema);
}

TEST_CASE("three-node cycle is reported without its tail") {
    try {
        parse_catalog(R"({"components":[{"id":1,"name":"a","prerequisites":[]},
                                        {"id":2,"name":"b","prerequisites":[1,4]},
                                        {"id":3,"name":"c","prerequisites":[2]},
                                        {"id":4,"name":"d","prerequisites":[3]}]})");
        FAIL("cycle not detected");
    } catch (const CatalogError& e) {
        CHECK(e.ids() == std::vector<ComponentId>{2, 3, 4});
    }
}

TEST_CASE("feasible_set") {
    const auto& cat = default_catalog();
    CHECK(feasible_set({1, 2, 3, 4}, cat) == ComponentSet{5, 6, 7, 8});
    CHECK(feasible_set(cat.all_ids(), cat).empty());
    CHECK(feasible_set({}, cat) == ComponentSet{1});
    CHECK_THROWS_AS(feasible_set({1, 12}, cat), CatalogError);
}

TEST_CASE("validate_sequence on the recorded orders") {
    const auto& cat = default_catalog();
    CHECK(validate_sequence(parse_sequence("1-2-3-4-8-5-6-7-9"), cat).valid);
    CHECK(validate_sequence(parse_sequence("1-2-3-4-6-7-8-5-9"), cat).valid);
    CHECK(validate_sequence(parse_sequence("1-2-3-4-8-6-5-7-9"), cat).valid);

    auto seq = parse_sequence("2-1-3-4-5-6-7-8-9");
    auto [idx, missing] = brute_first_violation(seq);
    REQUIRE(idx == 0);
    REQUIRE(missing == std::vector<int>{1});
    auto v = validate_sequence(seq, cat);
    CHECK_FALSE(v.valid);
    CHECK(v.violating_index == 0);
    CHECK(v.missing == ComponentSet{1});

    CHECK_THROWS_AS(validate_sequence({1, 2, 2}, cat), SequenceError);
    CHECK_THROWS_AS(validate_sequence({1, 10}, cat), SequenceError);
    CHECK_THROWS_AS(parse_sequence("1--2"), std::invalid_argument);
}

TEST_CASE("validate_sequence agrees with brute force on every permutation of 5..9") {
    const auto& cat = default_catalog();
    std::vector<int> tail{5, 6, 7, 8, 9};
    int valid = 0;
    do {
        std::vector<int> seq{1, 2, 3, 4};
        seq.insert(seq.end(), tail.begin(), tail.end());
        auto [idx, missing] = brute_first_violation(seq);
        auto v = validate_sequence(seq, cat);
        CHECK(v.valid == (idx < 0));
        if (!v.valid) {
            CHECK(static_cast<int>(v.violating_index) == idx);
            CHECK(v.missing == ComponentSet(missing.begin(), missing.end()));
        }
        valid += v.valid;
    } while (std::next_permutation(tail.begin(), tail.end()));
    // 9 last, 5..8 in any order.
    CHECK(valid == 24);
}

TEST_CASE("update_avail") {
    BeliefState b;
    b.avail0 = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    b.det = {1, 2};
    CHECK(update_avail(b).avail == ComponentSet{3, 4, 5, 6, 7, 8, 9});
    b.det = {1, 2, 3};
    b.brought = {3, 4};
    auto u = update_avail(b);
    CHECK(u.avail == ComponentSet{5, 6, 7, 8, 9});
    CHECK(u.det == b.det);
    CHECK(u.brought == b.brought);
    CHECK(update_avail(u) == u);
    b.det = b.avail0;
    CHECK(update_avail(b).avail.empty());
}

TEST_CASE("property: feasible_set and validate_sequence on random catalogs") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 4 + trial % 9;  // 4..12
        auto cat = cobot::testing::random_catalog(rng, n);

        for (unsigned mask = 0; mask < (1u << n); mask += 1 + (n > 10 ? 7 : 0)) {
            auto assembled = cobot::testing::subset_from_mask(mask, n);
            auto feas = feasible_set(assembled, cat);
            for (int c = 1; c <= n; ++c) {
                bool expect = !assembled.count(c);
                for (int p : cat.prerequisites(c)) expect = expect && assembled.count(p);
                CHECK(feas.count(c) == static_cast<std::size_t>(expect));
            }
        }

        // Random permutations: valid iff every step is feasible w.r.t. its prefix.
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 1);
        for (int k = 0; k < 30; ++k) {
            std::shuffle(perm.begin(), perm.end(), rng);
            bool stepwise = true;
            ComponentSet prefix;
            for (int c : perm) {
                stepwise = stepwise && feasible_set(prefix, cat).count(c);
                prefix.insert(c);
            }
            CHECK(validate_sequence(perm, cat).valid == stepwise);
        }
    }
}

TEST_CASE("property: update_avail idempotent and partitions avail0") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 500; ++k) {
        BeliefState b;
        b.avail0 = {1, 2, 3, 4, 5, 6, 7, 8, 9};
        b.det = cobot::testing::subset_from_mask(static_cast<unsigned>(rng() % 512), 9);
        b.brought = cobot::testing::subset_from_mask(static_cast<unsigned>(rng() % 512), 9);
        auto once = update_avail(b);
        CHECK(update_avail(once) == once);
        CHECK(set_union(once.avail, set_union(b.det, b.brought)) == b.avail0);
    }
}
