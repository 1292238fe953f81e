#include "cobot/robot/server.hpp"

#include <atomic>
#include <deque>
#include <functional>
#include <future>
#include <thread>

#include <boost/asio.hpp>

#include "cobot/robot/link.hpp"

namespace cobot::robot {

namespace asio = boost::asio;
using asio::ip::tcp;

namespace {

class Session : public std::enable_shared_from_this<Session> {
public:
    using OnClose = std::function<void(Session*)>;

    Session(tcp::socket socket, std::shared_ptr<RobotSim> sim, OnClose on_close, bool reset_on_hello = false)
        : socket_(std::move(socket)), sim_(std::move(sim)), on_close_(std::move(on_close)), reset_on_hello_(reset_on_hello) {}

    void start() { read(); }

    void reject(const std::string& reason) {
        close_after_write_ = true;
        send(encode_frame(NackFrame{0, reason}));
    }

    void close() {
        if (closed_) return;
        closed_ = true;
        boost::system::error_code ignored;
        socket_.shutdown(tcp::socket::shutdown_both, ignored);
        socket_.close(ignored);
        if (on_close_) on_close_(this);
    }

private:
    void read() {
        asio::async_read_until(socket_, buffer_, '\n', [self = shared_from_this()](boost::system::error_code ec, std::size_t n) {
            if (ec) {
                self->close();
                return;
            }
            std::string line(asio::buffers_begin(self->buffer_.data()),
                             asio::buffers_begin(self->buffer_.data()) + static_cast<long>(n));
            self->buffer_.consume(n);
            self->handle(line);
            if (!self->closed_) self->read();
        });
    }

    void send(std::string line) {
        out_.push_back(std::move(line));
        if (out_.size() == 1) write();
    }

    void write() {
        asio::async_write(socket_, asio::buffer(out_.front()), [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
            if (ec) {
                self->close();
                return;
            }
            self->out_.pop_front();
            if (!self->out_.empty())
                self->write();
            else if (self->close_after_write_)
                self->close();
        });
    }

    void handle(const std::string& line) {
        WireFrame frame;
        try {
            frame = decode_frame(line);
        } catch (const WireError&) {
            send(encode_frame(NackFrame{-1, "parse_error"}));
            return;
        }
        const std::int64_t seq = frame_seq(frame);
        if (std::holds_alternative<HelloFrame>(frame)) {
            if (reset_on_hello_) sim_->reset();
            hello_ = true;
            last_seq_ = seq;
            send(encode_frame(AckFrame{seq, 0.0}));
            return;
        }
        std::optional<planner::RobotAction> action;
        if (const auto* m = std::get_if<MoveToFrame>(&frame)) action = planner::MoveTo{m->pose, m->speed};
        if (const auto* g = std::get_if<SetGripperFrame>(&frame)) action = planner::SetGripper{g->gripper};
        if (!action) return send(encode_frame(NackFrame{seq, "unexpected_frame"}));
        if (!hello_) return send(encode_frame(NackFrame{seq, "no_hello"}));
        if (seq <= last_seq_) return send(encode_frame(NackFrame{seq, "bad_seq"}));
        last_seq_ = seq;

        auto outcome = sim_->execute(*action);
        if (!outcome.ok) return send(encode_frame(NackFrame{seq, outcome.reason}));
        send(encode_frame(AckFrame{seq, outcome.elapsed_s}));
        if (std::holds_alternative<planner::SetGripper>(*action)) send(encode_frame(sim_->status(seq)));
    }

    tcp::socket socket_;
    std::shared_ptr<RobotSim> sim_;
    OnClose on_close_;
    bool reset_on_hello_ = false;
    asio::streambuf buffer_{1 << 16};
    std::deque<std::string> out_;
    bool hello_ = false;
    bool closed_ = false;
    bool close_after_write_ = false;
    std::int64_t last_seq_ = -1;
};

}  // namespace

struct SimulatedRobotServer::Impl {
    asio::io_context io;
    tcp::acceptor acceptor{io};
    std::shared_ptr<RobotSim> sim;
    std::shared_ptr<Session> active;
    std::uint16_t port = 0;
    std::atomic<bool> reset_on_hello{false};
    std::thread thread;

    void accept() {
        acceptor.async_accept([this](boost::system::error_code ec, tcp::socket socket) {
            if (ec) return;  // acceptor closed
            if (active) {
                auto extra = std::make_shared<Session>(std::move(socket), sim, nullptr);
                extra->reject("busy");
            } else {
                active = std::make_shared<Session>(
                    std::move(socket), sim, [this](Session* s) {
                        if (active.get() == s) active.reset();
                    },
                    reset_on_hello.load());
                active->start();
            }
            accept();
        });
    }
};

SimulatedRobotServer::SimulatedRobotServer(std::shared_ptr<RobotSim> sim, const std::string& host, std::uint16_t port)
    : impl_(std::make_unique<Impl>()) {
    impl_->sim = std::move(sim);
    try {
        tcp::endpoint endpoint(asio::ip::make_address(host == "localhost" ? "127.0.0.1" : host), port);
        impl_->acceptor.open(endpoint.protocol());
        impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
        impl_->acceptor.bind(endpoint);
        impl_->acceptor.listen();
        impl_->port = impl_->acceptor.local_endpoint().port();
    } catch (const boost::system::system_error& e) {
        throw RobotLinkError(RobotLinkError::Kind::BindFailure,
                             "cannot listen on " + host + ":" + std::to_string(port) + ": " + e.what());
    }
    impl_->accept();
    impl_->thread = std::thread([impl = impl_.get()] { impl->io.run(); });
}

SimulatedRobotServer::~SimulatedRobotServer() { stop(); }

std::uint16_t SimulatedRobotServer::port() const noexcept { return impl_->port; }

void SimulatedRobotServer::set_reset_on_hello(bool enabled) { impl_->reset_on_hello = enabled; }

void SimulatedRobotServer::disconnect_client() {
    std::promise<void> done;
    auto future = done.get_future();
    asio::post(impl_->io, [this, &done] {
        if (auto s = impl_->active) s->close();
        done.set_value();
    });
    future.wait();
}

void SimulatedRobotServer::stop() {
    if (!impl_->thread.joinable()) return;
    asio::post(impl_->io, [impl = impl_.get()] {
        boost::system::error_code ignored;
        impl->acceptor.close(ignored);
        if (auto s = impl->active) s->close();
        impl->io.stop();
    });
    impl_->thread.join();
}

}  // namespace cobot::robot
