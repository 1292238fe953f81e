#include "cobot/llm/prompt_bundle.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

namespace cobot::llm {

std::size_t PromptBundle::attached_image_count() const {
    std::size_t n = 0;
    for (const auto& item : user_items) n += item.images.size();
    return n;
}

std::string render_text(const PromptBundle& bundle) {
    std::ostringstream out;
    out << "[system]\n" << bundle.system_text << "\n";
    out << "[assistant]\n" << bundle.assistant_example << "\n";
    if (bundle.prior_detection) out << "[assistant]\n" << *bundle.prior_detection << "\n";
    for (const auto& item : bundle.user_items) {
        out << "[user]\n";
        for (const auto& img : item.images) {
            out << "<image " << img.width << "x" << img.height << " detail=" << to_string(img.detail) << " ref="
                << img.payload_ref << ">\n";
        }
        out << item.text << "\n";
    }
    return out.str();
}

nlohmann::json to_chat_request(const PromptBundle& bundle, const std::string& model) {
    using nlohmann::json;
    json messages = json::array();
    messages.push_back({{"role", "system"}, {"content", bundle.system_text}});
    messages.push_back({{"role", "assistant"}, {"content", bundle.assistant_example}});
    if (bundle.prior_detection) messages.push_back({{"role", "assistant"}, {"content", *bundle.prior_detection}});
    for (const auto& item : bundle.user_items) {
        if (item.images.empty()) {
            messages.push_back({{"role", "user"}, {"content", item.text}});
            continue;
        }
        json parts = json::array();
        for (const auto& img : item.images) {
            parts.push_back({{"type", "image_url"},
                             {"image_url", {{"url", image_data_url(img)}, {"detail", to_string(img.detail)}}}});
        }
        parts.push_back({{"type", "text"}, {"text", item.text}});
        messages.push_back({{"role", "user"}, {"content", std::move(parts)}});
    }
    return {{"model", model}, {"temperature", 0}, {"messages", std::move(messages)}};
}

}  // namespace cobot::llm
