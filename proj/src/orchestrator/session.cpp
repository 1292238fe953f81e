#include "cobot/orchestrator/session.hpp"

#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cobot/orchestrator/session_log.hpp"

namespace cobot::orchestrator {

using nlohmann::json;

const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::TP: return "TP";
        case Outcome::FP: return "FP";
        case Outcome::FN: return "FN";
        case Outcome::TN: return "TN";
    }
    return "?";
}

std::map<ComponentId, Outcome> classify_detection(const detection::DetectionReport& report, const ComponentSet& truth) {
    std::map<ComponentId, Outcome> out;
    for (const auto& [id, verdict] : report.verdicts) {
        const bool said = verdict == detection::Verdict::Present;
        const bool is = truth.count(id) > 0;
        out[id] = said ? (is ? Outcome::TP : Outcome::FP) : (is ? Outcome::FN : Outcome::TN);
    }
    return out;
}

const char* to_string(Termination t) {
    switch (t) {
        case Termination::Completed: return "completed";
        case Termination::Deadlock: return "deadlock";
        case Termination::MaxIterations: return "max_iterations";
        case Termination::BackendFailure: return "backend_failure";
    }
    return "?";
}

Termination termination_from_string(const std::string& s) {
    for (auto t : {Termination::Completed, Termination::Deadlock, Termination::MaxIterations, Termination::BackendFailure})
        if (s == to_string(t)) return t;
    throw std::invalid_argument("unknown termination '" + s + "'");
}

const char* to_string(Progress p) {
    switch (p) {
        case Progress::Progressing: return "progress";
        case Progress::Deadlock: return "deadlock";
        case Progress::Terminal: return "terminal";
    }
    return "?";
}

int SessionResult::total_fp() const {
    int n = 0;
    for (const auto& [id, c] : fp_count) n += c;
    return n;
}

int SessionResult::total_fn() const {
    int n = 0;
    for (const auto& [id, c] : fn_count) n += c;
    return n;
}

Progress detect_deadlock(const std::vector<StepRecord>& history, int window) {
    if (history.empty()) return Progress::Progressing;
    if (history.back().belief.avail.empty()) return Progress::Terminal;
    if (window < 1 || static_cast<int>(history.size()) < window) return Progress::Progressing;
    auto key = [](const BeliefState& b) { return set_union(b.det, b.brought); };
    for (std::size_t i = history.size() - static_cast<std::size_t>(window); i < history.size(); ++i) {
        if (history[i].event.kind == sim::EventKind::Assembled) return Progress::Progressing;
        const ComponentSet before = i == 0 ? ComponentSet{} : key(history[i - 1].belief);
        if (key(history[i].belief) != before) return Progress::Progressing;
    }
    return Progress::Deadlock;
}

void SessionConfig::validate() const {
    if (!catalog || !layout || !detector || !planner || !op || !robot || !world)
        throw std::invalid_argument("session config is missing a component");
    if (max_iterations < static_cast<int>(catalog->size()))
        throw std::invalid_argument("max_iterations must be at least the catalog size");
    if (deadlock_window < 1) throw std::invalid_argument("deadlock_window must be at least 1");
    if (backend_retries < 0) throw std::invalid_argument("backend_retries must be non-negative");
    time.validate();
}

json to_json(const BeliefState& b) {
    return {{"det", b.det}, {"brought", b.brought}, {"avail", b.avail}, {"avail0", b.avail0}};
}

BeliefState belief_from_json(const json& j) {
    BeliefState b;
    b.det = j.at("det").get<ComponentSet>();
    b.brought = j.at("brought").get<ComponentSet>();
    b.avail = j.at("avail").get<ComponentSet>();
    b.avail0 = j.at("avail0").get<ComponentSet>();
    return b;
}

json to_json(const sim::WorldState& w) {
    return {{"assembled", w.assembled},
            {"magazine", w.magazine},
            {"delivery_zone", w.delivery_zone},
            {"held", w.held ? json(*w.held) : json(nullptr)},
            {"history", w.history},
            {"clock", w.clock}};
}

sim::WorldState world_from_json(const json& j) {
    sim::WorldState w;
    w.assembled = j.at("assembled").get<ComponentSet>();
    w.magazine = j.at("magazine").get<ComponentSet>();
    w.delivery_zone = j.at("delivery_zone").get<std::vector<ComponentId>>();
    if (!j.at("held").is_null()) w.held = j.at("held").get<ComponentId>();
    w.history = j.at("history").get<AssemblySequence>();
    w.clock = j.at("clock").get<double>();
    return w;
}

json to_json(const StepRecord& s, const ComponentCatalog& catalog) {
    json decision{{"next", s.decision.next ? json(*s.decision.next) : json(nullptr)},
                  {"rationale", s.decision.rationale},
                  {"policy", planner::to_string(s.decision.policy)},
                  {"overridden", s.decision.overridden}};
    json j{{"t", s.t},
           {"detection", detection::to_json(s.report)},
           {"detection_text", detection::serialize_report(s.report, catalog)},
           {"detection_attempts", s.detection_attempts},
           {"truth", s.truth},
           {"false_positives", s.false_positives},
           {"false_negatives", s.false_negatives},
           {"decision", decision},
           {"bring", s.bring},
           {"event", s.event.to_json()},
           {"belief", to_json(s.belief)},
           {"llm_s", s.llm_s},
           {"robot_s", s.robot_s},
           {"human_s", s.human_s},
           {"clock", s.clock},
           {"world", to_json(s.world_after)}};
    j["job"] = s.job ? json{{"completed_actions", s.job->completed_actions}, {"elapsed_s", s.job->elapsed_s}} : json(nullptr);
    j["robot_error"] = s.robot_error ? json(*s.robot_error) : json(nullptr);
    return j;
}

json to_json(const SessionResult& r) {
    auto counts = [](const std::map<ComponentId, int>& m) {
        json j = json::object();
        for (const auto& [id, n] : m) j[std::to_string(id)] = n;
        return j;
    };
    json finals = json::array();
    for (const auto& e : r.final_events) finals.push_back(e.to_json());
    return {{"success", r.success},
            {"termination", to_string(r.termination)},
            {"detail", r.detail},
            {"iterations", r.iterations},
            {"deliveries", r.deliveries},
            {"overrides", r.overrides},
            {"fp_count", counts(r.fp_count)},
            {"fn_count", counts(r.fn_count)},
            {"total_fp", r.total_fp()},
            {"total_fn", r.total_fn()},
            {"total_seconds", r.total_seconds},
            {"average_llm_seconds", r.average_llm_seconds()},
            {"realized_order", format_sequence(r.realized_order)},
            {"final_events", finals}};
}

json session_state_json(const std::string& status, int t, const BeliefState& belief,
                        const std::optional<ComponentId>& recommendation, const sim::WorldState& world) {
    return {{"status", status},
            {"iteration", t},
            {"belief", to_json(belief)},
            {"recommendation", recommendation ? json(*recommendation) : json(nullptr)},
            {"delivery_zone", world.delivery_zone},
            {"magazine", world.magazine},
            {"assembled", world.assembled},
            {"assembly_order", format_sequence(world.history)},
            {"clock", world.clock}};
}

namespace {

std::mt19937_64 time_rng(std::uint64_t seed, int t) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t), 0x74696d65u};
    return std::mt19937_64(seq);
}

}  // namespace

SessionResult run_session(const SessionConfig& cfg) {
    cfg.validate();
    const ComponentCatalog& catalog = *cfg.catalog;
    SessionResult r;
    BeliefState belief = BeliefState::initial(catalog);
    std::optional<detection::DetectionReport> prior;
    int t = 0;

    if (cfg.resume) {
        const ResumePoint& rp = *cfg.resume;
        t = rp.t;
        belief = rp.belief;
        prior = rp.prior;
        r.fp_count = rp.fp_count;
        r.fn_count = rp.fn_count;
        r.deliveries = rp.deliveries;
        r.overrides = rp.overrides;
        r.llm_seconds = rp.llm_seconds;
        r.steps = rp.steps;
        cfg.world->with([&](sim::WorldState& w) { w = rp.world; });
    }
    // A resumed session reseeds from its iteration so the continuation is reproducible.
    cfg.detector->reset(cfg.seed + static_cast<std::uint64_t>(t));
    cfg.op->reset(cfg.seed + static_cast<std::uint64_t>(t));
    auto rng = time_rng(cfg.seed, t);
    auto sample = [&](sim::StepKind kind) { return sim::sample_step_time(cfg.time, kind, rng); };

    std::optional<SessionLogWriter> log;
    if (cfg.log_dir) log.emplace(*cfg.log_dir, catalog, cfg.resume.has_value());

    double clock = cfg.world->copy().clock;
    bool ended = false;

    while (!belief.avail.empty()) {
        if (t >= cfg.max_iterations) {
            r.termination = Termination::MaxIterations;
            r.detail = "stopped after " + std::to_string(t) + " iterations";
            ended = true;
            break;
        }
        ++t;
        StepRecord s;
        s.t = t;

        // Detect (with retries on backend or parse failures).
        sim::WorldState seen = cfg.world->copy();
        seen.clock = clock;
        const SceneSnapshot scene = sim::snapshot(seen, cfg.scene_images);
        s.truth = seen.assembled;
        std::optional<detection::DetectionReport> report;
        std::string failure;
        for (int attempt = 0; attempt <= cfg.backend_retries && !report; ++attempt) {
            s.detection_attempts = attempt + 1;
            s.llm_s += sample(sim::StepKind::LlmCall);
            try {
                report = cfg.detector->detect(scene, prior);
            } catch (const detection::DetectionError& e) {
                failure = e.what();
            } catch (const llm::BackendError& e) {
                failure = e.what();
            }
        }
        clock += s.llm_s;
        r.llm_seconds += s.llm_s;
        if (!report) {
            r.termination = Termination::BackendFailure;
            r.detail = "detection failed after " + std::to_string(s.detection_attempts) + " attempts: " + failure;
            --t;
            ended = true;
            break;
        }
        s.report = *report;
        s.report.timestamp = clock;
        for (const auto& [id, outcome] : classify_detection(s.report, s.truth)) {
            if (outcome == Outcome::FP) {
                s.false_positives.insert(id);
                ++r.fp_count[id];
            } else if (outcome == Outcome::FN) {
                s.false_negatives.insert(id);
                ++r.fn_count[id];
            }
        }
        belief.det = s.report.present();
        belief = update_avail(belief);

        // Plan.
        if (belief.avail.empty()) {
            s.decision = {std::nullopt, "nothing left to bring", cfg.planner->policy(), false};
        } else {
            s.decision = cfg.planner->plan(belief);
        }
        if (s.decision.overridden) ++r.overrides;
        if (s.decision.next && (belief.brought.count(*s.decision.next) || !belief.avail.count(*s.decision.next)))
            throw std::logic_error("planner chose component " + std::to_string(*s.decision.next) + " outside avail");

        // Deliver.
        if (s.decision.next) {
            const ComponentId next = *s.decision.next;
            try {
                auto job = cfg.robot->send_job(planner::generate_actions(next, *cfg.layout, catalog));
                s.job = job;
                s.robot_s = job.elapsed_s;
                if (cfg.mirror_robot_deliveries) {
                    cfg.world->with([&](sim::WorldState& w) {
                        w.magazine.erase(next);
                        w.delivery_zone.push_back(next);
                    });
                }
                s.bring = {next};
                belief.brought.insert(next);
                ++r.deliveries;
            } catch (const robot::RobotLinkError& e) {
                s.robot_error = e.what();
                s.robot_s = e.partial().elapsed_s;
                r.termination = Termination::BackendFailure;
                r.detail = std::string("robot job failed: ") + e.what();
                ended = true;
            }
            clock += s.robot_s;
        }
        belief = update_avail(belief);
        s.belief = belief;

        // Operator.
        if (!ended) {
            sim::WorldState w = cfg.world->copy();
            w.clock = clock;
            if (cfg.observer)
                cfg.observer->on_awaiting_operator(
                    session_state_json("awaiting_operator", t, belief, s.decision.next, w));
            s.event = cfg.op->act(w, s.decision.next, catalog);
            if (s.event.kind != sim::EventKind::NoOp) s.human_s = sample(sim::StepKind::HumanAssemble);
            clock += s.human_s;
            cfg.world->with([&](sim::WorldState& shared) { shared = w; });
        } else {
            s.event = {sim::EventKind::NoOp, std::nullopt, sim::PartSource::DeliveryZone, false, "session aborted"};
        }
        s.clock = clock;
        s.world_after = cfg.world->with([&](sim::WorldState& w) {
            w.clock = clock;
            return w;
        });
        prior = s.report;
        r.steps.push_back(s);
        if (log) log->append(s);
        if (cfg.observer)
            cfg.observer->on_step(s, session_state_json("running", t, belief, s.decision.next, s.world_after));
        if (ended) break;

        if (detect_deadlock(r.steps, cfg.deadlock_window) == Progress::Deadlock) {
            r.termination = Termination::Deadlock;
            r.detail = "no progress in " + std::to_string(cfg.deadlock_window) + " consecutive iterations";
            ended = true;
            break;
        }
    }

    sim::WorldState w = cfg.world->copy();
    if (!ended) {
        // Nothing left to bring: the operator finishes whatever is still in the delivery zone.
        while (!w.delivery_zone.empty()) {
            auto ev = cfg.op->act(w, std::nullopt, catalog);
            r.final_events.push_back(ev);
            if (ev.kind == sim::EventKind::NoOp) break;
            clock += sample(sim::StepKind::HumanAssemble);
            if (ev.kind == sim::EventKind::Rejected) break;
        }
        w.clock = clock;
        cfg.world->with([&](sim::WorldState& shared) { shared = w; });
        if (w.complete(catalog)) {
            r.termination = Termination::Completed;
        } else {
            r.termination = Termination::Deadlock;
            r.detail = "nothing left to bring but the assembly lacks " +
                       format_set(set_minus(catalog.all_ids(), w.assembled));
        }
    }

    r.iterations = t;
    r.total_seconds = clock;
    r.realized_order = w.history;
    r.success = r.termination == Termination::Completed && w.complete(catalog);
    if (log) log->finish(r);
    if (cfg.observer) cfg.observer->on_finished(r, session_state_json("finished", t, belief, std::nullopt, w));
    return r;
}

}  // namespace cobot::orchestrator
