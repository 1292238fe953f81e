#include <doctest.h>

#include <random>
#include <thread>

#include <boost/asio.hpp>

#include "cobot/planner/planner.hpp"
#include "cobot/robot/link.hpp"
#include "cobot/robot/server.hpp"
#include "cobot/sim/operator.hpp"
#include "test_support.hpp"

using namespace cobot;
using namespace cobot::robot;
using cobot::testing::default_catalog;
namespace asio = boost::asio;
using asio::ip::tcp;

namespace {

const planner::MagazineLayout& layout() {
    static const auto l = planner::MagazineLayout::load(cobot::testing::data_path("default_layout.json"));
    return l;
}

struct Cell {
    std::shared_ptr<sim::WorldHandle> world = std::make_shared<sim::WorldHandle>(sim::WorldState::initial(default_catalog()));
    std::shared_ptr<RobotSim> robot = std::make_shared<RobotSim>(default_catalog(), layout(), world);
};

Pose random_pose(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Pose p{{u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng), u(rng)}};
    const double n = p.orientation.norm();
    p.orientation = {p.orientation.w / n, p.orientation.x / n, p.orientation.y / n, p.orientation.z / n};
    return p;
}

// Minimal line server used for fault injection: acks hello and `ack_count` commands, then
// either hangs up or goes silent.
class FakeRobot {
public:
    FakeRobot(int ack_count, bool hang_up) : acceptor_(io_, tcp::endpoint(asio::ip::make_address("127.0.0.1"), 0)) {
        port_ = acceptor_.local_endpoint().port();
        thread_ = std::thread([this, ack_count, hang_up] {
            tcp::socket s(io_);
            acceptor_.accept(s);
            asio::streambuf buf;
            boost::system::error_code ec;
            for (int i = 0; i <= ack_count; ++i) {
                asio::read_until(s, buf, '\n', ec);
                if (ec) return;
                std::istream in(&buf);
                std::string line;
                std::getline(in, line);
                const auto seq = frame_seq(decode_frame(line));
                asio::write(s, asio::buffer(encode_frame(AckFrame{seq, 1.0})), ec);
            }
            if (!hang_up) {
                asio::read_until(s, buf, '\n', ec);  // swallow the next command, never answer
                std::unique_lock<std::mutex> lock(m_);
                cv_.wait(lock, [this] { return done_; });
            }
            s.close(ec);
        });
    }
    ~FakeRobot() {
        {
            std::lock_guard<std::mutex> lock(m_);
            done_ = true;
        }
        cv_.notify_all();
        thread_.join();
    }
    std::uint16_t port() const { return port_; }

private:
    asio::io_context io_;
    tcp::acceptor acceptor_;
    std::uint16_t port_ = 0;
    std::thread thread_;
    std::mutex m_;
    std::condition_variable cv_;
    bool done_ = false;
};

std::string read_raw_line(tcp::socket& s, asio::streambuf& buf) {
    asio::read_until(s, buf, '\n');
    std::istream in(&buf);
    std::string line;
    std::getline(in, line);
    return line;
}

}  // namespace

TEST_CASE("wire frames round-trip exactly") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        const auto seq = static_cast<std::int64_t>(rng() >> 12);
        std::vector<WireFrame> frames = {
            HelloFrame{seq, "client-" + std::to_string(i)},
            MoveToFrame{seq, random_pose(rng), i % 2 ? SpeedClass::Transit : SpeedClass::Approach},
            SetGripperFrame{seq, i % 2 ? Gripper::Open : Gripper::Close},
            AckFrame{seq, std::uniform_real_distribution<double>(0, 100)(rng)},
            NackFrame{seq, "empty_slot"},
            StatusFrame{seq, random_pose(rng), Gripper::Close, i % 3 ? std::optional<int>(i % 9 + 1) : std::nullopt, {3, 5}},
        };
        for (const auto& f : frames) {
            const auto line = encode_frame(f);
            CHECK(line.back() == '\n');
            CHECK(std::count(line.begin(), line.end(), '\n') == 1);
            CHECK(decode_frame(line) == f);  // exact equality, doubles included
        }
    }
    CHECK(std::string(frame_type(NackFrame{})) == "nack");
}

TEST_CASE("wire decode rejects malformed frames") {
    CHECK_THROWS_AS(decode_frame("garbage"), WireError);
    CHECK_THROWS_AS(decode_frame("[1,2]"), WireError);
    CHECK_THROWS_AS(decode_frame(R"({"type":"ack"})"), WireError);
    CHECK_THROWS_AS(decode_frame(R"({"type":"ack","seq":1.5,"elapsed_s":1})"), WireError);
    CHECK_THROWS_AS(decode_frame(R"({"type":"warp","seq":1})"), WireError);
    CHECK_THROWS_AS(decode_frame(R"({"type":"set_gripper","seq":1,"gripper":"half"})"), WireError);
    CHECK_THROWS_AS(decode_frame(R"({"type":"move_to","seq":1,"position":[0,0,0],"orientation":[1,1,0,0],"speed_class":"transit"})"),
                    WireError);
    CHECK_THROWS_AS(decode_frame(R"({"type":"move_to","seq":1,"position":[0,0],"orientation":[1,0,0,0],"speed_class":"transit"})"),
                    WireError);
}

TEST_CASE("simulated robot executes a pick-and-place job in process") {
    Cell cell;
    InProcessRobotLink link(cell.robot);
    auto report = link.send_job(planner::generate_actions(3, layout(), default_catalog()));
    CHECK(report.completed_actions == 8);
    CHECK(report.elapsed_s == doctest::Approx(12.0));
    auto w = cell.world->copy();
    CHECK(w.delivery_zone == std::vector<ComponentId>{3});
    CHECK_FALSE(w.magazine.count(3));
    CHECK_FALSE(w.held);
    CHECK(sim::conserved(w, default_catalog()));

    // Slot 3 is now empty: the second pick halts at the close.
    try {
        link.send_job(planner::generate_actions(3, layout(), default_catalog()));
        FAIL("expected a nack");
    } catch (const RobotLinkError& e) {
        CHECK(e.kind() == RobotLinkError::Kind::NackReceived);
        CHECK(e.reason() == "empty_slot");
        CHECK(e.seq() == 3);
        CHECK(e.partial().completed_actions == 2);
    }
    CHECK(cell.world->copy().delivery_zone == std::vector<ComponentId>{3});
}

TEST_CASE("slot matching uses a 1 mm tolerance") {
    Cell cell;
    auto actions = planner::generate_actions(4, layout(), default_catalog());
    auto shifted = actions;
    std::get<planner::MoveTo>(shifted[1]).pose.position.x += 0.0009;
    InProcessRobotLink(cell.robot).send_job(shifted);
    CHECK(cell.world->copy().delivery_zone == std::vector<ComponentId>{4});

    Cell far;
    auto off = actions;
    std::get<planner::MoveTo>(off[1]).pose.position.x += 0.002;
    auto report = InProcessRobotLink(far.robot).send_job(off);
    CHECK(report.completed_actions == 8);  // closes on air, opens with nothing held
    auto w = far.world->copy();
    CHECK(w.delivery_zone.empty());
    CHECK(w.magazine.count(4));
}

TEST_CASE("conservation holds across randomized jobs") {
    const auto& cat = default_catalog();
    Cell cell;
    InProcessRobotLink link(cell.robot);
    std::mt19937_64 rng(11);
    int nacks = 0, deliveries = 0;
    for (int job = 0; job < 1000; ++job) {
        const ComponentId id = 3 + static_cast<int>(rng() % 7);
        auto actions = planner::generate_actions(id, layout(), cat);
        // Occasionally jitter a waypoint beyond the tolerance.
        if (rng() % 4 == 0) {
            auto& move = std::get<planner::MoveTo>(actions[rng() % 2 ? 1 : 5]);
            move.pose.position.y += 0.005;
        }
        const auto before = cell.world->copy().delivery_zone.size();
        try {
            link.send_job(actions);
        } catch (const RobotLinkError& e) {
            REQUIRE(e.kind() == RobotLinkError::Kind::NackReceived);
            ++nacks;
        }
        auto w = cell.world->copy();
        REQUIRE(sim::conserved(w, cat));
        REQUIRE(w.delivery_zone.size() >= before);
        REQUIRE(w.delivery_zone.size() <= before + 1);
        if (w.delivery_zone.size() == before + 1) ++deliveries;
        // Put delivered parts back so the magazine never runs dry for long.
        if (rng() % 3 == 0) {
            cell.world->with([](sim::WorldState& s) {
                for (ComponentId c : s.delivery_zone) s.magazine.insert(c);
                s.delivery_zone.clear();
            });
        }
    }
    CHECK(nacks > 0);
    CHECK(deliveries > 100);
}

TEST_CASE("tcp link: full job over a local socket") {
    Cell cell;
    SimulatedRobotServer server(cell.robot, "127.0.0.1", 0);
    TcpRobotLink link("127.0.0.1", server.port());
    auto report = link.send_job(planner::generate_actions(3, layout(), default_catalog()));
    CHECK(report.completed_actions == 8);
    CHECK(report.elapsed_s == doctest::Approx(12.0));
    auto w = cell.world->copy();
    CHECK(w.delivery_zone == std::vector<ComponentId>{3});
    CHECK(sim::conserved(w, default_catalog()));
    REQUIRE(link.last_status());
    CHECK(link.last_status()->delivery_zone == std::vector<int>{3});
    CHECK(link.last_status()->gripper == Gripper::Open);

    try {
        link.send_job(planner::generate_actions(3, layout(), default_catalog()));
        FAIL("expected a nack");
    } catch (const RobotLinkError& e) {
        CHECK(e.kind() == RobotLinkError::Kind::NackReceived);
        CHECK(e.reason() == "empty_slot");
        CHECK(e.partial().completed_actions == 2);
    }
}

TEST_CASE("tcp link: single client, parse errors and bind failure") {
    Cell cell;
    SimulatedRobotServer server(cell.robot, "127.0.0.1", 0);
    TcpRobotLink first("127.0.0.1", server.port());
    try {
        TcpRobotLink second("127.0.0.1", server.port());
        FAIL("second client must be refused");
    } catch (const RobotLinkError& e) {
        CHECK(e.kind() == RobotLinkError::Kind::HandshakeRejected);
        CHECK(e.reason() == "busy");
    }
    CHECK_THROWS_AS(SimulatedRobotServer(cell.robot, "127.0.0.1", server.port()), RobotLinkError);
    // The first client still works.
    CHECK(first.send_job(planner::generate_actions(5, layout(), default_catalog())).completed_actions == 8);

    Cell other;
    SimulatedRobotServer raw_server(other.robot, "127.0.0.1", 0);
    asio::io_context io;
    tcp::socket s(io);
    s.connect(tcp::endpoint(asio::ip::make_address("127.0.0.1"), raw_server.port()));
    asio::streambuf buf;
    asio::write(s, asio::buffer(std::string("this is not json\n")));
    CHECK(decode_frame(read_raw_line(s, buf)) == WireFrame{NackFrame{-1, "parse_error"}});
    asio::write(s, asio::buffer(encode_frame(SetGripperFrame{1, Gripper::Close})));
    CHECK(decode_frame(read_raw_line(s, buf)) == WireFrame{NackFrame{1, "no_hello"}});
    asio::write(s, asio::buffer(encode_frame(HelloFrame{0, "raw"})));
    CHECK(decode_frame(read_raw_line(s, buf)) == WireFrame{AckFrame{0, 0.0}});
    asio::write(s, asio::buffer(encode_frame(SetGripperFrame{2, Gripper::Close})));
    CHECK(std::holds_alternative<AckFrame>(decode_frame(read_raw_line(s, buf))));
    CHECK(std::holds_alternative<StatusFrame>(decode_frame(read_raw_line(s, buf))));
    asio::write(s, asio::buffer(encode_frame(SetGripperFrame{2, Gripper::Open})));
    CHECK(decode_frame(read_raw_line(s, buf)) == WireFrame{NackFrame{2, "bad_seq"}});
}

TEST_CASE("tcp link: dropped connection and timeout") {
    {
        FakeRobot robot(3, true);
        TcpRobotLink link("127.0.0.1", robot.port());
        try {
            link.send_job(planner::generate_actions(3, layout(), default_catalog()));
            FAIL("expected ConnectionLost");
        } catch (const RobotLinkError& e) {
            CHECK(e.kind() == RobotLinkError::Kind::ConnectionLost);
            CHECK(e.partial().completed_actions == 3);
            CHECK(e.partial().elapsed_s == 3.0);
        }
    }
    {
        FakeRobot robot(1, false);
        TcpRobotLink link("127.0.0.1", robot.port(), std::chrono::milliseconds(200));
        try {
            link.send_job(planner::generate_actions(3, layout(), default_catalog()));
            FAIL("expected Timeout");
        } catch (const RobotLinkError& e) {
            CHECK(e.kind() == RobotLinkError::Kind::Timeout);
            CHECK(e.seq() == 2);
            CHECK(e.partial().completed_actions == 1);
        }
    }
    {
        Cell cell;
        SimulatedRobotServer server(cell.robot, "127.0.0.1", 0);
        TcpRobotLink link("127.0.0.1", server.port());
        server.disconnect_client();
        CHECK_THROWS_AS(link.send_job(planner::generate_actions(3, layout(), default_catalog())), RobotLinkError);
        // Slot freed for a new client.
        TcpRobotLink again("127.0.0.1", server.port());
        CHECK(again.send_job(planner::generate_actions(3, layout(), default_catalog())).completed_actions == 8);
    }
}

TEST_CASE("reference session against the tcp server delivers seven parts") {
    const auto& cat = default_catalog();
    Cell cell;
    SimulatedRobotServer server(cell.robot, "127.0.0.1", 0);
    TcpRobotLink link("127.0.0.1", server.port());
    BeliefState belief = BeliefState::initial(cat);
    int deliveries = 0;
    for (int t = 0; t < 20; ++t) {
        belief.det = cell.world->copy().assembled;
        belief = update_avail(belief);
        if (belief.avail.empty()) break;
        auto d = planner::plan_next_reference(belief, cat);
        if (d.next) {
            link.send_job(planner::generate_actions(*d.next, layout(), cat));
            belief.brought.insert(*d.next);
            ++deliveries;
        }
        cell.world->with([&](sim::WorldState& w) { return sim::compliant_act(w, d.next, cat); });
    }
    auto w = cell.world->copy();
    CHECK(deliveries == 7);
    CHECK(w.complete(cat));
    CHECK(validate_sequence(w.history, cat).valid);
}

TEST_CASE("a server that resets on hello serves consecutive sessions") {
    const auto& cat = default_catalog();
    Cell cell;
    SimulatedRobotServer server(cell.robot, "127.0.0.1", 0);
    {
        TcpRobotLink first("127.0.0.1", server.port());
        CHECK(first.send_job(planner::generate_actions(3, layout(), cat)).completed_actions == 8);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));  // let the server see the disconnect
    // Without a reset the slot stays empty for the next client.
    {
        TcpRobotLink second("127.0.0.1", server.port());
        CHECK_THROWS_AS(second.send_job(planner::generate_actions(3, layout(), cat)), RobotLinkError);
    }
    server.set_reset_on_hello(true);
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    TcpRobotLink third("127.0.0.1", server.port());
    CHECK(third.send_job(planner::generate_actions(3, layout(), cat)).completed_actions == 8);
    auto w = cell.world->copy();
    CHECK(w.delivery_zone == std::vector<ComponentId>{3});
    CHECK(sim::conserved(w, cat));
}

TEST_CASE("endpoint parsing") {
    CHECK(parse_endpoint("127.0.0.1:30002") == std::pair<std::string, std::uint16_t>{"127.0.0.1", 30002});
    CHECK_THROWS_AS(parse_endpoint("localhost"), std::invalid_argument);
    CHECK_THROWS_AS(parse_endpoint("host:99999"), std::invalid_argument);
    CHECK_THROWS_AS(parse_endpoint("host:12ab"), std::invalid_argument);
}
