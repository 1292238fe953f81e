#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace cobot::llm {

class BackendError : public std::runtime_error {
public:
    enum class Kind { Timeout, Protocol, Unavailable };
    BackendError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

struct ChatReply {
    std::string content;
    std::optional<int> prompt_tokens;
    std::optional<int> completion_tokens;
};

class ChatClient {
public:
    virtual ~ChatClient() = default;
    /// Sends one chat-completions request body. Throws BackendError.
    virtual ChatReply complete(const nlohmann::json& request) = 0;
};

struct EndpointConfig {
    std::string url = "https://api.openai.com/v1/chat/completions";
    std::string model = "gpt-4o";
    std::string api_key_env = "OPENAI_API_KEY";
    std::chrono::milliseconds timeout{60000};

    static EndpointConfig from_json(const nlohmann::json& j);
};

/// Chat-completions over HTTP(S). The API key is read from the environment at
/// construction and never written to logs or error messages.
class HttpChatClient final : public ChatClient {
public:
    explicit HttpChatClient(EndpointConfig config);
    ChatReply complete(const nlohmann::json& request) override;

private:
    EndpointConfig config_;
    std::string origin_;
    std::string path_;
    std::string api_key_;
};

/// Parses a chat-completions response body; throws BackendError{Protocol} when malformed.
ChatReply parse_chat_reply(const std::string& body);

/// Stable 64-bit FNV-1a over the canonical request serialization, as 16 hex digits.
std::string request_hash(const nlohmann::json& request);

/// Answers from a fixture of `{"request_hash", "response"}` lines. Repeated requests
/// replay their recorded responses in order; the last one repeats once exhausted.
class ReplayChatClient final : public ChatClient {
public:
    explicit ReplayChatClient(const std::filesystem::path& fixture);
    ChatReply complete(const nlohmann::json& request) override;
    std::size_t entry_count() const noexcept { return entries_; }

private:
    struct Queue {
        std::deque<std::string> responses;
        std::string last;
    };
    std::map<std::string, Queue> by_hash_;
    std::size_t entries_ = 0;
};

/// Forwards to another client and appends every exchange to a replay fixture.
class RecordingChatClient final : public ChatClient {
public:
    RecordingChatClient(ChatClient& inner, const std::filesystem::path& fixture);
    ChatReply complete(const nlohmann::json& request) override;

private:
    ChatClient& inner_;
    std::ofstream out_;
    std::mutex mu_;
};

}  // namespace cobot::llm
