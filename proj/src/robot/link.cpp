#include "cobot/robot/link.hpp"

#include <boost/asio.hpp>

namespace cobot::robot {

namespace asio = boost::asio;
using asio::ip::tcp;

const char* to_string(RobotLinkError::Kind k) {
    switch (k) {
        case RobotLinkError::Kind::ConnectionLost: return "connection_lost";
        case RobotLinkError::Kind::NackReceived: return "nack_received";
        case RobotLinkError::Kind::Timeout: return "timeout";
        case RobotLinkError::Kind::BindFailure: return "bind_failure";
        case RobotLinkError::Kind::HandshakeRejected: return "handshake_rejected";
    }
    return "?";
}

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size())
        throw std::invalid_argument("endpoint must look like host:port, got '" + text + "'");
    const std::string port_text = text.substr(colon + 1);
    std::size_t used = 0;
    int port = 0;
    try {
        port = std::stoi(port_text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != port_text.size() || port < 0 || port > 65535)
        throw std::invalid_argument("invalid port in endpoint '" + text + "'");
    return {text.substr(0, colon), static_cast<std::uint16_t>(port)};
}

JobReport InProcessRobotLink::send_job(const std::vector<planner::RobotAction>& actions) {
    JobReport report;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        auto outcome = sim_->execute(actions[i]);
        if (!outcome.ok) {
            const auto seq = static_cast<std::int64_t>(i + 1);
            throw RobotLinkError(RobotLinkError::Kind::NackReceived,
                                 "robot refused action " + std::to_string(seq) + ": " + outcome.reason, seq,
                                 outcome.reason, report);
        }
        ++report.completed_actions;
        report.elapsed_s += outcome.elapsed_s;
    }
    return report;
}

struct TcpRobotLink::Impl {
    asio::io_context io;
    tcp::socket socket{io};
    asio::streambuf buffer{1 << 16};
    std::chrono::milliseconds timeout;

    explicit Impl(std::chrono::milliseconds t) : timeout(t) {}

    void run(std::int64_t seq) {
        io.restart();
        io.run_for(timeout);
        if (!io.stopped()) {
            boost::system::error_code ignored;
            socket.close(ignored);
            io.run();
            throw RobotLinkError(RobotLinkError::Kind::Timeout, "robot did not answer seq " + std::to_string(seq), seq);
        }
    }

    void fail_lost(const boost::system::error_code& ec, std::int64_t seq) {
        throw RobotLinkError(RobotLinkError::Kind::ConnectionLost, "robot connection lost: " + ec.message(), seq);
    }

    void write_line(const std::string& line, std::int64_t seq) {
        boost::system::error_code ec;
        asio::async_write(socket, asio::buffer(line), [&](boost::system::error_code e, std::size_t) { ec = e; });
        run(seq);
        if (ec) fail_lost(ec, seq);
    }

    WireFrame read_frame(std::int64_t seq) {
        boost::system::error_code ec;
        std::size_t n = 0;
        asio::async_read_until(socket, buffer, '\n', [&](boost::system::error_code e, std::size_t k) {
            ec = e;
            n = k;
        });
        run(seq);
        if (ec) fail_lost(ec, seq);
        std::string line(asio::buffers_begin(buffer.data()), asio::buffers_begin(buffer.data()) + static_cast<long>(n));
        buffer.consume(n);
        try {
            return decode_frame(line);
        } catch (const WireError& e) {
            throw RobotLinkError(RobotLinkError::Kind::ConnectionLost, std::string("robot sent garbage: ") + e.what(), seq);
        }
    }
};

TcpRobotLink::TcpRobotLink(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout)
    : impl_(std::make_unique<Impl>(timeout)) {
    boost::system::error_code ec;
    tcp::resolver resolver(impl_->io);
    auto endpoints = resolver.resolve(host, std::to_string(port), ec);
    if (ec) throw RobotLinkError(RobotLinkError::Kind::ConnectionLost, "cannot resolve " + host + ": " + ec.message(), 0);
    asio::async_connect(impl_->socket, endpoints, [&](boost::system::error_code e, const tcp::endpoint&) { ec = e; });
    impl_->run(0);
    if (ec) impl_->fail_lost(ec, 0);

    impl_->write_line(encode_frame(HelloFrame{0, "cobot-orchestrator"}), 0);
    for (;;) {
        auto frame = impl_->read_frame(0);
        if (const auto* nack = std::get_if<NackFrame>(&frame))
            throw RobotLinkError(RobotLinkError::Kind::HandshakeRejected, "robot rejected hello: " + nack->reason, 0,
                                 nack->reason);
        if (std::holds_alternative<AckFrame>(frame) && frame_seq(frame) == 0) break;
    }
}

TcpRobotLink::~TcpRobotLink() {
    boost::system::error_code ignored;
    impl_->socket.shutdown(tcp::socket::shutdown_both, ignored);
    impl_->socket.close(ignored);
}

JobReport TcpRobotLink::send_job(const std::vector<planner::RobotAction>& actions) {
    JobReport report;
    for (const auto& action : actions) {
        const std::int64_t seq = next_seq_++;
        try {
            impl_->write_line(encode_frame(command_frame(seq, action)), seq);
            for (;;) {
                auto frame = impl_->read_frame(seq);
                if (auto* status = std::get_if<StatusFrame>(&frame)) {
                    last_status_ = *status;
                    continue;
                }
                if (frame_seq(frame) != seq) continue;  // stale reply
                if (const auto* nack = std::get_if<NackFrame>(&frame))
                    throw RobotLinkError(RobotLinkError::Kind::NackReceived,
                                         "robot refused seq " + std::to_string(seq) + ": " + nack->reason, seq,
                                         nack->reason, report);
                if (const auto* ack = std::get_if<AckFrame>(&frame)) {
                    ++report.completed_actions;
                    report.elapsed_s += ack->elapsed_s;
                    break;
                }
            }
        } catch (const RobotLinkError& e) {
            if (e.kind() == RobotLinkError::Kind::NackReceived) throw;
            throw RobotLinkError(e.kind(), e.what(), e.seq(), e.reason(), report);
        }
    }
    return report;
}

}  // namespace cobot::robot
