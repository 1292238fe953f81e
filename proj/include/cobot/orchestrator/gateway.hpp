#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "cobot/orchestrator/session.hpp"

namespace cobot::orchestrator {

/// What the console operator asks for.
struct OperatorAction {
    enum class Kind { AssembleDelivered, TakeFromMagazine };
    Kind kind = Kind::AssembleDelivered;
    std::optional<ComponentId> component;

    /// {"action":"assemble_delivered"} or {"action":"take_from_magazine","component":id}.
    /// Throws std::invalid_argument on anything else.
    static OperatorAction from_json(const nlohmann::json& j);
};

/// Shared state between a running session and its HTTP gateway: the latest snapshot, the
/// event history for server-sent events, and a one-slot queue of console actions.
class SessionHub final : public SessionObserver {
public:
    struct Event {
        std::size_t id = 0;
        std::string type;
        nlohmann::json data;
    };
    enum class Submit { Accepted, Busy, Finished };

    explicit SessionHub(const ComponentCatalog& catalog);

    void on_awaiting_operator(const nlohmann::json& state) override;
    void on_step(const StepRecord& step, const nlohmann::json& state) override;
    void on_finished(const SessionResult& result, const nlohmann::json& state) override;
    /// Records an operator event outside the step stream (rejected console attempts).
    void publish_operator_event(const sim::OperatorEvent& event);

    /// Current state plus the step history and, once finished, the result.
    nlohmann::json snapshot() const;
    bool finished() const;

    /// Queues one console action. Busy when one is already pending.
    Submit submit(const OperatorAction& action);
    /// Blocks until an action is queued, the hub is closed, or the timeout passes.
    std::optional<OperatorAction> take_action(std::chrono::milliseconds timeout);

    /// Events with id > `after` (all when empty); waits up to `wait` for new ones.
    std::vector<Event> events_after(std::optional<std::size_t> after, std::chrono::milliseconds wait) const;

    /// Wakes every waiter; later waits return immediately.
    void close();
    bool closed() const;

private:
    void push_event(const std::string& type, nlohmann::json data);

    const ComponentCatalog& catalog_;
    mutable std::mutex mutex_;
    mutable std::condition_variable changed_;
    nlohmann::json state_;
    nlohmann::json steps_ = nlohmann::json::array();
    std::optional<nlohmann::json> result_;
    std::vector<Event> events_;
    std::optional<OperatorAction> pending_;
    bool finished_ = false;
    bool closed_ = false;
};

/// A human at the console plays the operator. Rejected attempts are reported through the
/// hub and the operator may try again within the same turn.
class ConsoleOperator final : public sim::Operator {
public:
    ConsoleOperator(SessionHub& hub, std::chrono::milliseconds turn_timeout);
    sim::OperatorEvent act(sim::WorldState& world, std::optional<ComponentId> recommendation,
                           const ComponentCatalog& catalog) override;

private:
    SessionHub& hub_;
    std::chrono::milliseconds timeout_;
};

/// HTTP front end: GET /session, POST /session/operator-action, GET /session/events (SSE).
class Gateway {
public:
    /// Binds immediately; port 0 picks a free one. Throws std::runtime_error when binding fails.
    Gateway(SessionHub& hub, const std::string& host, int port);
    ~Gateway();
    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    int port() const noexcept { return port_; }
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

}  // namespace cobot::orchestrator
