#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cobot/llm/image.hpp"

namespace cobot::llm {

struct UserItem {
    std::string text;
    std::vector<ImageSpec> images;

    bool operator==(const UserItem&) const = default;
};

/// A chat prompt laid out by role: fixed system instructions, a fixed assistant example
/// response, optional prior output handed back through the assistant role, and the
/// user questions.
struct PromptBundle {
    std::string system_text;
    std::string assistant_example;
    std::vector<UserItem> user_items;
    std::optional<std::string> prior_detection;

    std::size_t attached_image_count() const;
    bool operator==(const PromptBundle&) const = default;
};

/// Plain-text rendering of every role; used for golden snapshots and logs.
std::string render_text(const PromptBundle& bundle);

/// Chat-completions request body (temperature 0, images inline as base64 data URLs).
nlohmann::json to_chat_request(const PromptBundle& bundle, const std::string& model);

}  // namespace cobot::llm
