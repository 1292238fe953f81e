#include <doctest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "cobot/planner/actions.hpp"
#include "cobot/planner/planner.hpp"
#include "test_support.hpp"

using namespace cobot;
using namespace cobot::planner;
using cobot::testing::default_catalog;

namespace {

BeliefState belief_of(ComponentSet det, ComponentSet brought) {
    BeliefState b = BeliefState::initial(default_catalog());
    b.det = std::move(det);
    b.brought = std::move(brought);
    return update_avail(b);
}

nlohmann::json raw_catalog() {
    return nlohmann::json::parse(cobot::testing::read_file(cobot::testing::data_path("default_catalog.json")));
}

nlohmann::json raw_layout() {
    return nlohmann::json::parse(cobot::testing::read_file(cobot::testing::data_path("default_layout.json")));
}

const MagazineLayout& layout() {
    static const MagazineLayout l = MagazineLayout::load(cobot::testing::data_path("default_layout.json"));
    return l;
}

class ScriptedClient : public llm::ChatClient {
public:
    std::vector<std::string> replies;
    std::size_t next = 0;
    nlohmann::json last;
    llm::ChatReply complete(const nlohmann::json& request) override {
        last = request;
        if (next >= replies.size()) throw llm::BackendError(llm::BackendError::Kind::Timeout, "scripted timeout");
        return {replies[next++], std::nullopt, std::nullopt};
    }
};

}  // namespace

TEST_CASE("reference planner examples") {
    const auto& cat = default_catalog();
    CHECK(plan_next_reference(belief_of({1, 2}, {}), cat).next == 3);
    CHECK(plan_next_reference(belief_of({1, 2, 3, 4, 8}, {}), cat).next == 5);
    CHECK_FALSE(plan_next_reference(belief_of(cat.all_ids(), {}), cat).next.has_value());
    // Delivered but not yet mounted: successors wait for detection.
    CHECK_FALSE(plan_next_reference(belief_of({1, 2}, {3}), cat).next.has_value());
    CHECK(plan_next_reference(belief_of({1, 2}, {}), cat) == plan_next_reference(belief_of({1, 2}, {}), cat));
}

TEST_CASE("reference planner is safe and lowest-id over every belief state") {
    const auto& cat = default_catalog();
    auto raw = raw_catalog();
    std::map<int, std::pair<std::vector<int>, bool>> pre;
    for (const auto& c : raw["components"])
        pre[c["id"].get<int>()] = {c["prerequisites"].get<std::vector<int>>(), c.value("robot_deliverable", true)};

    long states = 0;
    for (unsigned dm = 0; dm < 512; ++dm) {
        for (unsigned bm = 0; bm < 512; ++bm) {
            auto b = belief_of(cobot::testing::subset_from_mask(dm, 9), cobot::testing::subset_from_mask(bm, 9));
            // Brute force: scan ids upward for the first deliverable, available one with detected prerequisites.
            std::optional<int> expect;
            for (int c = 1; c <= 9 && !expect; ++c) {
                bool ok = !(dm & (1u << (c - 1))) && !(bm & (1u << (c - 1))) && pre[c].second;
                for (int p : pre[c].first) ok = ok && (dm & (1u << (p - 1)));
                if (ok) expect = c;
            }
            auto d = plan_next_reference(b, cat);
            CHECK(d.next == expect);
            ++states;
        }
    }
    CHECK(states == 512 * 512);
}

TEST_CASE("reference planner completes in seven deliveries under truthful detection") {
    const auto& cat = default_catalog();
    ComponentSet world{1, 2};
    BeliefState b = BeliefState::initial(cat);
    int deliveries = 0;
    for (int t = 0; t < 50 && !update_avail(b).avail.empty(); ++t) {
        b.det = world;
        b = update_avail(b);
        auto d = plan_next_reference(b, cat);
        if (d.next) {
            b.brought.insert(*d.next);
            ++deliveries;
            REQUIRE(is_subset(cat.prerequisites(*d.next), world));
            world.insert(*d.next);
        }
        b = update_avail(b);
    }
    CHECK(deliveries == 7);
    CHECK(world == cat.all_ids());
}

TEST_CASE("planner prompt substitution and golden snapshot") {
    const auto& cat = default_catalog();
    auto bundle = build_planner_prompt(belief_of({1, 2}, {}), cat);
    REQUIRE(bundle.user_items.size() == 1);
    CHECK(bundle.attached_image_count() == 0);
    const auto& user = bundle.user_items[0].text;
    CHECK(user.find("mounted on the assembly: 1, 2\n") != std::string::npos);
    CHECK(user.find("already brought: none\n") != std::string::npos);
    CHECK(user.find("All components of the product: 1, 2, 3, 4, 5, 6, 7, 8, 9\n") != std::string::npos);
    CHECK(user.find("Bring component <number>.") != std::string::npos);
    CHECK(cobot::testing::matches_golden("planner_prompt_det12.txt", llm::render_text(bundle)));

    auto brought3 = build_planner_prompt(belief_of({1, 2}, {3}), cat).user_items[0].text;
    CHECK(brought3.find("already brought: 3\n") != std::string::npos);

    auto done = build_planner_prompt(belief_of(cat.all_ids(), {}), cat).user_items[0].text;
    CHECK(done.find("Reply 'done'") != std::string::npos);
    CHECK(done.find("{") == std::string::npos);
}

TEST_CASE("planner response parsing") {
    const auto& cat = default_catalog();
    CHECK(parse_planner_response("Bring component 3.", belief_of({1, 2}, {}), cat).next == 3);
    CHECK(parse_planner_response("Component #4 next. Pick-and-place ok", belief_of({1, 2, 3}, {3}), cat).next == 4);
    CHECK_FALSE(parse_planner_response("done", belief_of(cat.all_ids(), {}), cat).next.has_value());

    try {
        parse_planner_response("Bring component 9.", belief_of({1, 2}, {}), cat);
        FAIL("expected InfeasibleChoice");
    } catch (const PlanError& e) {
        CHECK(e.kind() == PlanError::Kind::InfeasibleChoice);
        CHECK(e.id() == 9);
        CHECK(e.missing() == ComponentSet{3, 4, 5, 6, 7, 8});
    }
    auto kind = [&](const std::string& text, BeliefState b) {
        try {
            parse_planner_response(text, b, cat);
        } catch (const PlanError& e) {
            return e.kind();
        }
        FAIL("expected PlanError");
        return PlanError::Kind::NoIdFound;
    };
    CHECK(kind("I am not sure.", belief_of({1, 2}, {})) == PlanError::Kind::NoIdFound);
    CHECK(kind("done", belief_of({1, 2}, {})) == PlanError::Kind::NoIdFound);
    CHECK(kind("Bring component 3.", belief_of({1, 2}, {3})) == PlanError::Kind::NotAvailable);
    CHECK(kind("Bring component 12.", belief_of({1, 2}, {})) == PlanError::Kind::NotAvailable);
    CHECK(kind("Bring component 1.", belief_of({}, {})) == PlanError::Kind::NotAvailable);
}

TEST_CASE("property: accepted llm choices satisfy the reference invariant") {
    const auto& cat = default_catalog();
    std::mt19937_64 rng(17);
    int accepted = 0;
    for (int k = 0; k < 5000; ++k) {
        auto b = belief_of(cobot::testing::subset_from_mask(rng() % 512, 9), cobot::testing::subset_from_mask(rng() % 512, 9));
        const int pick = static_cast<int>(rng() % 11);
        try {
            auto d = parse_planner_response("Bring component " + std::to_string(pick) + ".", b, cat);
            REQUIRE(d.next);
            CHECK(b.avail.count(*d.next));
            CHECK(cat.at(*d.next).robot_deliverable);
            CHECK(is_subset(cat.prerequisites(*d.next), b.det));
            ++accepted;
        } catch (const PlanError&) {
        }
    }
    CHECK(accepted > 0);
}

TEST_CASE("llm planner falls back to the reference policy") {
    const auto& cat = default_catalog();
    auto client = std::make_shared<ScriptedClient>();
    client->replies = {"Bring component 3.", "Bring component 9.", "no idea"};
    LlmPlanner planner(cat, client, "gpt-4");

    auto d1 = planner.plan(belief_of({1, 2}, {}));
    CHECK(d1.next == 3);
    CHECK(d1.policy == Policy::Llm);
    CHECK_FALSE(d1.overridden);
    CHECK(client->last["temperature"] == 0);

    auto d2 = planner.plan(belief_of({1, 2}, {}));
    CHECK(d2.next == 3);
    CHECK(d2.overridden);
    CHECK(d2.policy == Policy::Reference);

    CHECK(planner.plan(belief_of({1, 2, 3}, {3})).overridden);
    CHECK(planner.plan(belief_of({1, 2, 3}, {3})).overridden);  // backend timeout
}

TEST_CASE("generate_actions") {
    const auto& cat = default_catalog();
    auto actions = generate_actions(3, layout(), cat);
    REQUIRE(actions.size() == 8);

    auto raw = raw_layout();
    const double slot_z = raw["slots"]["3"]["position"][2].get<double>();
    const double offset = raw["approach_offset_m"].get<double>();
    CHECK(offset == doctest::Approx(0.10));
    CHECK(std::get<MoveTo>(actions[0]).pose.position.z == doctest::Approx(slot_z + 0.10).epsilon(1e-12));
    CHECK(std::get<MoveTo>(actions[1]).pose.position.z == slot_z);
    CHECK(std::get<MoveTo>(actions[5]).pose == layout().delivery_pose());

    std::string shape;
    int closes = 0, opens = 0;
    for (const auto& a : actions) {
        if (std::holds_alternative<MoveTo>(a)) {
            shape += 'M';
        } else {
            shape += 'G';
            (std::get<SetGripper>(a).state == Gripper::Close ? closes : opens)++;
        }
    }
    CHECK(shape == "MMGMMMGM");
    CHECK(closes == 1);
    CHECK(opens == 1);
    CHECK(std::get<SetGripper>(actions[2]).state == Gripper::Close);
    CHECK(std::get<SetGripper>(actions[6]).state == Gripper::Open);

    auto other = generate_actions(7, layout(), cat);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(actions[i].index() == other[i].index());
        if (i >= 4) CHECK(actions[i] == other[i]);  // delivery half is shared
    }
    CHECK(std::get<MoveTo>(actions[1]).pose != std::get<MoveTo>(other[1]).pose);

    CHECK_THROWS_AS(generate_actions(1, layout(), cat), UnmappedSlot);
    raw["approach_offset_m"] = 0.0;
    CHECK_THROWS_AS(MagazineLayout::from_json(raw), std::invalid_argument);
    auto bad = raw_layout();
    bad["slots"]["3"]["orientation"] = {1.0, 1.0, 0.0, 0.0};
    CHECK_THROWS_AS(MagazineLayout::from_json(bad), std::invalid_argument);
    CHECK_NOTHROW(layout().check_covers(cat));
}
