#include "cobot/detection/detector.hpp"

#include <nlohmann/json.hpp>

#include "cobot/detection/prompt.hpp"

namespace cobot::detection {

namespace {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), static_cast<std::uint32_t>(b),
                      static_cast<std::uint32_t>(b >> 32)};
    std::uint64_t out;
    seq.generate(reinterpret_cast<std::uint32_t*>(&out), reinterpret_cast<std::uint32_t*>(&out) + 2);
    return out;
}

}  // namespace

void NoiseModel::validate() const {
    for (const auto& [id, n] : components) {
        if (n.fp_rate < 0 || n.fp_rate > 1 || n.fn_rate < 0 || n.fn_rate > 1)
            throw std::invalid_argument("noise rates for component " + std::to_string(id) + " must lie in [0,1]");
    }
    if (max_transient_errors && *max_transient_errors < 0)
        throw std::invalid_argument("max_transient_errors must be non-negative");
}

NoiseModel NoiseModel::from_json(const nlohmann::json& j) {
    NoiseModel m;
    m.rng_seed = j.value("seed", std::uint64_t{0});
    if (j.contains("max_transient_errors") && !j["max_transient_errors"].is_null())
        m.max_transient_errors = j["max_transient_errors"].get<int>();
    if (j.contains("components")) {
        for (const auto& [key, v] : j["components"].items()) {
            ComponentNoise n;
            n.fp_rate = v.value("fp_rate", 0.0);
            n.fn_rate = v.value("fn_rate", 0.0);
            const auto p = v.value("persistence", std::string("independent"));
            if (p == "sticky") {
                n.persistence = Persistence::Sticky;
            } else if (p != "independent") {
                throw std::invalid_argument("unknown noise persistence '" + p + "'");
            }
            m.components[std::stoi(key)] = n;
        }
    }
    m.validate();
    return m;
}

nlohmann::json NoiseModel::to_json() const {
    nlohmann::json comps = nlohmann::json::object();
    for (const auto& [id, n] : components) {
        comps[std::to_string(id)] = {{"fp_rate", n.fp_rate},
                                     {"fn_rate", n.fn_rate},
                                     {"persistence", n.persistence == Persistence::Sticky ? "sticky" : "independent"}};
    }
    nlohmann::json j{{"seed", rng_seed}, {"components", comps}};
    if (max_transient_errors) j["max_transient_errors"] = *max_transient_errors;
    return j;
}

OracleDetector::OracleDetector(const ComponentCatalog& catalog, NoiseModel noise)
    : catalog_(catalog), noise_(std::move(noise)) {
    noise_.validate();
    reset(0);
}

void OracleDetector::reset(std::uint64_t seed) {
    rng_.seed(mix_seed(noise_.rng_seed, seed));
    sticky_fp_.clear();
    sticky_fn_.clear();
    transient_errors_ = 0;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& [id, n] : noise_.components) {
        if (n.persistence != Persistence::Sticky) continue;
        if (u(rng_) < n.fp_rate) sticky_fp_.insert(id);
        if (u(rng_) < n.fn_rate) sticky_fn_.insert(id);
    }
}

DetectionReport OracleDetector::detect(const SceneSnapshot& scene, const std::optional<DetectionReport>&) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ComponentSet present;
    for (const auto& c : catalog_.components()) {
        const bool truth = scene.view.count(c.id) > 0;
        bool reported = truth;

        auto it = noise_.components.find(c.id);
        if (it != noise_.components.end() && it->second.persistence == Persistence::Independent) {
            // Both draws happen unconditionally so the stream does not depend on the world.
            const double fp_draw = u(rng_);
            const double fn_draw = u(rng_);
            const bool flip = truth ? fn_draw < it->second.fn_rate : fp_draw < it->second.fp_rate;
            const bool allowed = !noise_.max_transient_errors || transient_errors_ < *noise_.max_transient_errors;
            if (flip && allowed) {
                reported = !truth;
                ++transient_errors_;
            }
        }
        if (!truth && sticky_fp_.count(c.id)) reported = true;
        if (truth && sticky_fn_.count(c.id)) reported = false;
        if (reported) present.insert(c.id);
    }
    return make_report(present, catalog_, Source::Oracle, scene.clock);
}

LlmDetector::LlmDetector(const ComponentCatalog& catalog, LlmDetectorConfig config,
                         std::shared_ptr<llm::ChatClient> client, Source source)
    : catalog_(catalog), config_(std::move(config)), client_(std::move(client)), source_(source) {}

DetectionReport LlmDetector::detect(const SceneSnapshot& scene, const std::optional<DetectionReport>& prior) {
    auto bundle = build_detection_prompt(catalog_, config_.catalog_image, scene.images, prior);
    auto request = llm::to_chat_request(bundle, config_.model);
    auto reply = client_->complete(request);

    auto report = parse_detection_response(reply.content, catalog_);
    report.source = source_;
    report.timestamp = scene.clock;
    int tokens = llm::estimate_image_tokens(config_.catalog_image);
    for (const auto& img : scene.images) tokens += llm::estimate_image_tokens(img);
    report.prompt_tokens = reply.prompt_tokens.value_or(tokens);
    return report;
}

std::unique_ptr<Detector> make_replay_detector(const ComponentCatalog& catalog, LlmDetectorConfig config,
                                               const std::filesystem::path& fixture) {
    auto client = std::make_shared<llm::ReplayChatClient>(fixture);
    return std::make_unique<LlmDetector>(catalog, std::move(config), std::move(client), Source::Replay);
}

}  // namespace cobot::detection
