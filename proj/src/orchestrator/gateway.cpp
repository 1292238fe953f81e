#include "cobot/orchestrator/gateway.hpp"

#include <atomic>
#include <sstream>

#include <httplib.h>

namespace cobot::orchestrator {

using nlohmann::json;

OperatorAction OperatorAction::from_json(const json& j) {
    if (!j.is_object() || !j.contains("action") || !j["action"].is_string())
        throw std::invalid_argument("body must be an object with a string 'action'");
    const std::string action = j["action"].get<std::string>();
    if (action == "assemble_delivered") return {Kind::AssembleDelivered, std::nullopt};
    if (action == "take_from_magazine") {
        if (!j.contains("component") || !j["component"].is_number_integer())
            throw std::invalid_argument("take_from_magazine needs an integer 'component'");
        return {Kind::TakeFromMagazine, j["component"].get<ComponentId>()};
    }
    throw std::invalid_argument("unknown action '" + action + "'");
}

SessionHub::SessionHub(const ComponentCatalog& catalog) : catalog_(catalog) {
    state_ = {{"status", "starting"}, {"iteration", 0}};
}

void SessionHub::push_event(const std::string& type, json data) {
    events_.push_back({events_.size() + 1, type, std::move(data)});
}

void SessionHub::on_awaiting_operator(const json& state) {
    std::lock_guard<std::mutex> lock(mutex_);
    state_ = state;
    push_event("awaiting_operator", state);
    changed_.notify_all();
}

void SessionHub::on_step(const StepRecord& step, const json& state) {
    std::lock_guard<std::mutex> lock(mutex_);
    state_ = state;
    auto j = to_json(step, catalog_);
    steps_.push_back(j);
    push_event("step", std::move(j));
    changed_.notify_all();
}

void SessionHub::on_finished(const SessionResult& result, const json& state) {
    std::lock_guard<std::mutex> lock(mutex_);
    state_ = state;
    result_ = to_json(result);
    finished_ = true;
    pending_.reset();
    push_event("finished", *result_);
    changed_.notify_all();
}

void SessionHub::publish_operator_event(const sim::OperatorEvent& event) {
    std::lock_guard<std::mutex> lock(mutex_);
    push_event("operator_event", event.to_json());
    changed_.notify_all();
}

json SessionHub::snapshot() const {
    std::lock_guard<std::mutex> lock(mutex_);
    json j = state_;
    j["steps"] = steps_;
    j["result"] = result_ ? *result_ : json(nullptr);
    j["pending_action"] = pending_.has_value();
    return j;
}

bool SessionHub::finished() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return finished_;
}

SessionHub::Submit SessionHub::submit(const OperatorAction& action) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (finished_ || closed_) return Submit::Finished;
    if (pending_) return Submit::Busy;
    pending_ = action;
    changed_.notify_all();
    return Submit::Accepted;
}

std::optional<OperatorAction> SessionHub::take_action(std::chrono::milliseconds timeout) {
    std::unique_lock<std::mutex> lock(mutex_);
    changed_.wait_for(lock, timeout, [this] { return pending_.has_value() || closed_; });
    auto action = pending_;
    pending_.reset();
    return action;
}

std::vector<SessionHub::Event> SessionHub::events_after(std::optional<std::size_t> after,
                                                        std::chrono::milliseconds wait) const {
    std::unique_lock<std::mutex> lock(mutex_);
    const std::size_t from = after.value_or(0);
    changed_.wait_for(lock, wait, [&] { return events_.size() > from || closed_; });
    if (events_.size() <= from) return {};
    return {events_.begin() + static_cast<long>(from), events_.end()};
}

void SessionHub::close() {
    std::lock_guard<std::mutex> lock(mutex_);
    closed_ = true;
    changed_.notify_all();
}

bool SessionHub::closed() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return closed_;
}

ConsoleOperator::ConsoleOperator(SessionHub& hub, std::chrono::milliseconds turn_timeout)
    : hub_(hub), timeout_(turn_timeout) {}

sim::OperatorEvent ConsoleOperator::act(sim::WorldState& world, std::optional<ComponentId> recommendation,
                                        const ComponentCatalog& catalog) {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        auto action = left.count() > 0 ? hub_.take_action(left) : std::nullopt;
        if (!action)
            return {sim::EventKind::NoOp, std::nullopt, sim::PartSource::DeliveryZone, false, "no operator action"};

        sim::OperatorEvent ev;
        if (action->kind == OperatorAction::Kind::AssembleDelivered) {
            ev = sim::compliant_act(world, recommendation, catalog);
        } else {
            const ComponentId id = *action->component;
            ev = catalog.contains(id) ? sim::attempt_assembly(world, id, sim::PartSource::Magazine, catalog)
                                      : sim::OperatorEvent{sim::EventKind::NoOp, id, sim::PartSource::Magazine, true,
                                                           "component " + std::to_string(id) + " is not in the catalog"};
            ev.deviation = true;
        }
        if (ev.kind == sim::EventKind::Assembled) return ev;
        if (ev.kind == sim::EventKind::NoOp && action->kind == OperatorAction::Kind::AssembleDelivered) return ev;
        // A rejected or impossible attempt leaves the world unchanged; the turn goes on.
        hub_.publish_operator_event(ev);
    }
}

struct Gateway::Impl {
    httplib::Server server;
    std::thread thread;
    std::atomic<bool> stopping{false};
};

namespace {

std::string sse_frame(const SessionHub::Event& e) {
    std::ostringstream out;
    out << "id: " << e.id << "\nevent: " << e.type << "\ndata: " << e.data.dump() << "\n\n";
    return out.str();
}

}  // namespace

Gateway::Gateway(SessionHub& hub, const std::string& host, int port) : impl_(std::make_unique<Impl>()) {
    auto& server = impl_->server;
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});

    server.Get("/session", [&hub](const httplib::Request&, httplib::Response& res) {
        res.set_content(hub.snapshot().dump(), "application/json");
    });

    server.Post("/session/operator-action", [&hub](const httplib::Request& req, httplib::Response& res) {
        OperatorAction action;
        try {
            action = OperatorAction::from_json(json::parse(req.body));
        } catch (const std::exception& e) {
            res.status = 400;
            res.set_content(json{{"error", e.what()}}.dump(), "application/json");
            return;
        }
        switch (hub.submit(action)) {
            case SessionHub::Submit::Accepted:
                res.status = 202;
                res.set_content(json{{"accepted", true}}.dump(), "application/json");
                break;
            case SessionHub::Submit::Busy:
                res.status = 409;
                res.set_content(json{{"error", "an operator action is already pending"}}.dump(), "application/json");
                break;
            case SessionHub::Submit::Finished:
                res.status = 409;
                res.set_content(json{{"error", "the session has finished"}}.dump(), "application/json");
                break;
        }
    });

    Impl* impl = impl_.get();
    server.Get("/session/events", [&hub, impl](const httplib::Request& req, httplib::Response& res) {
        std::optional<std::size_t> last;
        if (req.has_header("Last-Event-ID")) {
            try {
                last = std::stoul(req.get_header_value("Last-Event-ID"));
            } catch (const std::exception&) {
                last.reset();
            }
        }
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider("text/event-stream", [&hub, impl, last](std::size_t, httplib::DataSink& sink) mutable {
            if (impl->stopping) return false;
            auto events = hub.events_after(last, std::chrono::milliseconds(500));
            for (const auto& e : events) {
                const auto frame = sse_frame(e);
                if (!sink.write(frame.data(), frame.size())) return false;
                last = e.id;
            }
            if (events.empty()) {
                static const std::string keepalive = ": keepalive\n\n";
                if (!sink.write(keepalive.data(), keepalive.size())) return false;
            }
            if ((hub.finished() || hub.closed()) && hub.events_after(last, std::chrono::milliseconds(0)).empty()) {
                sink.done();
            }
            return true;
        });
    });

    if (port == 0) {
        port_ = server.bind_to_any_port(host);
    } else {
        port_ = server.bind_to_port(host, port) ? port : -1;
    }
    if (port_ <= 0) throw std::runtime_error("cannot bind gateway to " + host + ":" + std::to_string(port));
    impl_->thread = std::thread([impl] { impl->server.listen_after_bind(); });
    server.wait_until_ready();
}

Gateway::~Gateway() { stop(); }

void Gateway::stop() {
    if (!impl_->thread.joinable()) return;
    impl_->stopping = true;
    impl_->server.stop();
    impl_->thread.join();
}

}  // namespace cobot::orchestrator
