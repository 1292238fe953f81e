#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>

#include <nlohmann/json_fwd.hpp>

#include "cobot/detection/report.hpp"
#include "cobot/llm/chat_client.hpp"
#include "cobot/llm/image.hpp"
#include "cobot/sim/scene.hpp"

namespace cobot::detection {

enum class Persistence { Independent, Sticky };

struct ComponentNoise {
    double fp_rate = 0.0;  // report present while absent
    double fn_rate = 0.0;  // report absent while present
    Persistence persistence = Persistence::Independent;
};

/// Per-component detection errors. Sticky errors are drawn once per session and then
/// persist on every call; independent errors are drawn on every call.
struct NoiseModel {
    std::map<ComponentId, ComponentNoise> components;
    std::uint64_t rng_seed = 0;
    /// Caps the number of independent (transient) errors injected per session.
    std::optional<int> max_transient_errors;

    void validate() const;
    static NoiseModel from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

class Detector {
public:
    virtual ~Detector() = default;
    virtual Source source() const = 0;
    /// Starts a new session; backends with randomness reseed here.
    virtual void reset(std::uint64_t seed) = 0;
    /// Throws DetectionError or llm::BackendError on failure.
    virtual DetectionReport detect(const SceneSnapshot& scene, const std::optional<DetectionReport>& prior) = 0;
};

/// Ground-truth detector with injected noise.
class OracleDetector final : public Detector {
public:
    OracleDetector(const ComponentCatalog& catalog, NoiseModel noise);

    Source source() const override { return Source::Oracle; }
    void reset(std::uint64_t seed) override;
    DetectionReport detect(const SceneSnapshot& scene, const std::optional<DetectionReport>& prior) override;

    const NoiseModel& noise() const noexcept { return noise_; }

private:
    const ComponentCatalog& catalog_;
    NoiseModel noise_;
    std::mt19937_64 rng_;
    ComponentSet sticky_fp_;
    ComponentSet sticky_fn_;
    int transient_errors_ = 0;
};

struct LlmDetectorConfig {
    llm::ImageSpec catalog_image{768, 2048, llm::Detail::High, "sim://catalog"};
    std::string model = "gpt-4o";
};

/// Vision-chat detector: builds the per-component YES/NO prompt, sends it through a chat
/// client, and parses the reply. Used with a live HTTP client or a replay client.
class LlmDetector final : public Detector {
public:
    LlmDetector(const ComponentCatalog& catalog, LlmDetectorConfig config, std::shared_ptr<llm::ChatClient> client,
                Source source = Source::Llm);

    Source source() const override { return source_; }
    void reset(std::uint64_t) override {}
    DetectionReport detect(const SceneSnapshot& scene, const std::optional<DetectionReport>& prior) override;

private:
    const ComponentCatalog& catalog_;
    LlmDetectorConfig config_;
    std::shared_ptr<llm::ChatClient> client_;
    Source source_;
};

std::unique_ptr<Detector> make_replay_detector(const ComponentCatalog& catalog, LlmDetectorConfig config,
                                               const std::filesystem::path& fixture);

}  // namespace cobot::detection
