#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cobot/orchestrator/gateway.hpp"
#include "cobot/orchestrator/scenario.hpp"
#include "test_support.hpp"

using namespace cobot;
using namespace cobot::orchestrator;
using cobot::testing::default_catalog;
using namespace std::chrono_literals;

namespace {

struct SseEvent {
    std::size_t id = 0;
    std::string type;
    nlohmann::json data;
};

/// Splits a text/event-stream body into events; comment lines are skipped.
std::vector<SseEvent> parse_sse(const std::string& body) {
    std::vector<SseEvent> out;
    SseEvent cur;
    bool any = false;
    std::size_t pos = 0;
    while (pos < body.size()) {
        auto end = body.find('\n', pos);
        if (end == std::string::npos) break;
        const std::string line = body.substr(pos, end - pos);
        pos = end + 1;
        if (line.empty()) {
            if (any) out.push_back(cur);
            cur = {};
            any = false;
        } else if (line.rfind("id: ", 0) == 0) {
            cur.id = std::stoul(line.substr(4));
            any = true;
        } else if (line.rfind("event: ", 0) == 0) {
            cur.type = line.substr(7);
            any = true;
        } else if (line.rfind("data: ", 0) == 0) {
            cur.data = nlohmann::json::parse(line.substr(6));
            any = true;
        }
    }
    return out;
}

std::string read_stream(int port, std::optional<std::size_t> last_id = std::nullopt) {
    httplib::Client cli("127.0.0.1", port);
    cli.set_read_timeout(10, 0);
    httplib::Headers headers;
    if (last_id) headers.emplace("Last-Event-ID", std::to_string(*last_id));
    std::string body;
    auto res = cli.Get("/session/events", headers, [&](const char* data, std::size_t len) {
        body.append(data, len);
        return true;
    });
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->get_header_value("Content-Type") == "text/event-stream");
    return body;
}

httplib::Result post_action(httplib::Client& cli, const nlohmann::json& body) {
    return cli.Post("/session/operator-action", body.dump(), "application/json");
}

}  // namespace

TEST_CASE("operator action parsing") {
    auto a = OperatorAction::from_json({{"action", "assemble_delivered"}});
    CHECK(a.kind == OperatorAction::Kind::AssembleDelivered);
    auto b = OperatorAction::from_json({{"action", "take_from_magazine"}, {"component", 8}});
    CHECK(b.kind == OperatorAction::Kind::TakeFromMagazine);
    CHECK(b.component == 8);
    CHECK_THROWS_AS(OperatorAction::from_json({{"action", "take_from_magazine"}}), std::invalid_argument);
    CHECK_THROWS_AS(OperatorAction::from_json({{"action", "dance"}}), std::invalid_argument);
    CHECK_THROWS_AS(OperatorAction::from_json(nlohmann::json::array()), std::invalid_argument);
}

TEST_CASE("hub queue holds one action at a time") {
    SessionHub hub(default_catalog());
    CHECK(hub.submit({}) == SessionHub::Submit::Accepted);
    CHECK(hub.submit({}) == SessionHub::Submit::Busy);
    CHECK(hub.snapshot()["pending_action"] == true);
    CHECK(hub.take_action(0ms).has_value());
    CHECK_FALSE(hub.take_action(10ms).has_value());
    CHECK(hub.submit({}) == SessionHub::Submit::Accepted);

    SessionResult r;
    hub.on_finished(r, {{"status", "finished"}});
    CHECK(hub.submit({}) == SessionHub::Submit::Finished);
    CHECK(hub.finished());
    auto events = hub.events_after(std::nullopt, 0ms);
    REQUIRE_FALSE(events.empty());
    CHECK(events.back().type == "finished");
}

TEST_CASE("gateway endpoints before and after a session") {
    SessionHub hub(default_catalog());
    Gateway gw(hub, "127.0.0.1", 0);
    REQUIRE(gw.port() > 0);
    httplib::Client cli("127.0.0.1", gw.port());

    auto snap = cli.Get("/session");
    REQUIRE(snap);
    CHECK(snap->status == 200);
    CHECK(snap->get_header_value("Access-Control-Allow-Origin") == "*");
    auto j = nlohmann::json::parse(snap->body);
    CHECK(j["status"] == "starting");
    CHECK(j["steps"].empty());
    CHECK(j["result"].is_null());

    auto bad = cli.Post("/session/operator-action", "{not json", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    auto unknown = post_action(cli, {{"action", "juggle"}});
    REQUIRE(unknown);
    CHECK(unknown->status == 400);

    auto first = post_action(cli, {{"action", "assemble_delivered"}});
    REQUIRE(first);
    CHECK(first->status == 202);
    auto second = post_action(cli, {{"action", "take_from_magazine"}, {"component", 5}});
    REQUIRE(second);
    CHECK(second->status == 409);
    hub.take_action(0ms);

    auto scenario = Scenario::defaults();
    SessionRig rig(scenario);
    auto cfg = rig.config();
    cfg.observer = &hub;
    auto result = run_session(cfg);
    REQUIRE(result.success);

    auto done = post_action(cli, {{"action", "assemble_delivered"}});
    REQUIRE(done);
    CHECK(done->status == 409);

    auto final_snap = nlohmann::json::parse(cli.Get("/session")->body);
    CHECK(final_snap["status"] == "finished");
    CHECK(final_snap["steps"].size() == static_cast<std::size_t>(result.iterations));
    CHECK(final_snap["result"]["success"] == true);

    // A finished session's stream replays everything and then ends.
    auto events = parse_sse(read_stream(gw.port()));
    REQUIRE_FALSE(events.empty());
    CHECK(events.back().type == "finished");
    long steps = std::count_if(events.begin(), events.end(), [](const SseEvent& e) { return e.type == "step"; });
    CHECK(steps == result.iterations);
    for (std::size_t i = 1; i < events.size(); ++i) CHECK(events[i].id == events[i - 1].id + 1);

    // Last-Event-ID resumes after the given event.
    auto tail = parse_sse(read_stream(gw.port(), events[events.size() - 3].id));
    REQUIRE(tail.size() == 2);
    CHECK(tail[0].id == events[events.size() - 2].id);
    gw.stop();
}

TEST_CASE("console-driven session over http") {
    SessionHub hub(default_catalog());
    Gateway gw(hub, "127.0.0.1", 0);

    auto scenario = Scenario::defaults();
    scenario.robot = "loopback";
    scenario.max_iterations = 40;
    SessionRig rig(scenario, std::make_unique<ConsoleOperator>(hub, 10s));
    auto cfg = rig.config();
    cfg.observer = &hub;

    std::string stream;
    std::thread reader([&] { stream = read_stream(gw.port()); });
    // Give the stream a moment to attach so it is live rather than a replay.
    std::this_thread::sleep_for(50ms);

    SessionResult result;
    std::thread session([&] { result = run_session(cfg); });

    // The console: mount what the robot brings, except at the fifth step where the operator
    // first reaches for the fasteners (rejected) and then takes the wheels from the magazine.
    httplib::Client cli("127.0.0.1", gw.port());
    int acted = 0;
    bool tried_fasteners = false;
    int busy = 0;
    const auto deadline = std::chrono::steady_clock::now() + 30s;
    while (std::chrono::steady_clock::now() < deadline) {
        auto snap = nlohmann::json::parse(cli.Get("/session")->body);
        if (snap["status"] == "finished") break;
        const int iteration = snap["iteration"].get<int>();
        if (snap["status"] != "awaiting_operator" || iteration <= acted || snap["pending_action"].get<bool>()) {
            std::this_thread::sleep_for(2ms);
            continue;
        }
        nlohmann::json action = {{"action", "assemble_delivered"}};
        const bool step5 = snap["assembled"].size() == 4;
        if (step5 && !tried_fasteners) {
            action = {{"action", "take_from_magazine"}, {"component", 9}};
        } else if (step5) {
            action = {{"action", "take_from_magazine"}, {"component", 8}};
        }
        auto res = post_action(cli, action);
        REQUIRE(res);
        if (res->status == 409) {
            ++busy;
            std::this_thread::sleep_for(2ms);
            continue;
        }
        CHECK(res->status == 202);
        if (step5 && !tried_fasteners) {
            tried_fasteners = true;
            // Wait for the rejection before the next attempt within the same turn.
            while (nlohmann::json::parse(cli.Get("/session")->body)["pending_action"].get<bool>())
                std::this_thread::sleep_for(1ms);
            std::this_thread::sleep_for(20ms);
        } else {
            acted = iteration;
        }
    }
    session.join();
    reader.join();
    gw.stop();

    CHECK(tried_fasteners);
    CHECK(result.success);
    CHECK(format_sequence(result.realized_order) == "1-2-3-4-8-5-6-7-9");
    CHECK(result.termination == Termination::Completed);

    auto events = parse_sse(stream);
    REQUIRE_FALSE(events.empty());
    CHECK(events.back().type == "finished");
    CHECK(events.back().data["success"] == true);
    bool saw_rejection = false;
    for (const auto& e : events) {
        if (e.type == "operator_event" && e.data["kind"] == "rejected" && e.data["component"] == 9) saw_rejection = true;
    }
    CHECK(saw_rejection);
    long steps = std::count_if(events.begin(), events.end(), [](const SseEvent& e) { return e.type == "step"; });
    CHECK(steps == result.iterations);
    long awaiting = std::count_if(events.begin(), events.end(), [](const SseEvent& e) { return e.type == "awaiting_operator"; });
    CHECK(awaiting >= result.iterations);
}
