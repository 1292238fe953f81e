#include "cobot/llm/chat_client.hpp"

#include <cstdio>
#include <cstdlib>

#include <httplib.h>

namespace cobot::llm {

EndpointConfig EndpointConfig::from_json(const nlohmann::json& j) {
    EndpointConfig c;
    c.url = j.value("url", c.url);
    c.model = j.value("model", c.model);
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    if (j.contains("timeout_ms")) c.timeout = std::chrono::milliseconds(j["timeout_ms"].get<long>());
    return c;
}

HttpChatClient::HttpChatClient(EndpointConfig config) : config_(std::move(config)) {
    const auto scheme_end = config_.url.find("://");
    if (scheme_end == std::string::npos) throw std::invalid_argument("endpoint url needs a scheme: " + config_.url);
    const auto path_start = config_.url.find('/', scheme_end + 3);
    origin_ = config_.url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : config_.url.substr(path_start);
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
}

ChatReply HttpChatClient::complete(const nlohmann::json& request) {
    httplib::Client client(origin_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    auto res = client.Post(path_, headers, request.dump(), "application/json");
    if (!res) {
        const auto err = res.error();
        if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout)
            throw BackendError(BackendError::Kind::Timeout, "LLM endpoint timed out (" + httplib::to_string(err) + ")");
        throw BackendError(BackendError::Kind::Unavailable, "LLM endpoint unreachable (" + httplib::to_string(err) + ")");
    }
    if (res->status != 200)
        throw BackendError(BackendError::Kind::Protocol, "LLM endpoint returned HTTP " + std::to_string(res->status));
    return parse_chat_reply(res->body);
}

ChatReply parse_chat_reply(const std::string& body) {
    try {
        auto j = nlohmann::json::parse(body);
        ChatReply reply;
        reply.content = j.at("choices").at(0).at("message").at("content").get<std::string>();
        if (j.contains("usage")) {
            const auto& u = j["usage"];
            if (u.contains("prompt_tokens")) reply.prompt_tokens = u["prompt_tokens"].get<int>();
            if (u.contains("completion_tokens")) reply.completion_tokens = u["completion_tokens"].get<int>();
        }
        return reply;
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(BackendError::Kind::Protocol, std::string("malformed chat reply: ") + e.what());
    }
}

std::string request_hash(const nlohmann::json& request) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : request.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ReplayChatClient::ReplayChatClient(const std::filesystem::path& fixture) {
    std::ifstream in(fixture);
    if (!in) throw std::runtime_error("cannot open replay fixture " + fixture.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            by_hash_[j.at("request_hash").get<std::string>()].responses.push_back(j.at("response").get<std::string>());
            ++entries_;
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("replay fixture line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

ChatReply ReplayChatClient::complete(const nlohmann::json& request) {
    const auto hash = request_hash(request);
    auto it = by_hash_.find(hash);
    if (it == by_hash_.end()) throw BackendError(BackendError::Kind::Protocol, "no replay entry for request " + hash);
    auto& q = it->second;
    if (!q.responses.empty()) {
        q.last = std::move(q.responses.front());
        q.responses.pop_front();
    }
    return {q.last, std::nullopt, std::nullopt};
}

RecordingChatClient::RecordingChatClient(ChatClient& inner, const std::filesystem::path& fixture)
    : inner_(inner), out_(fixture, std::ios::app) {
    if (!out_) throw std::runtime_error("cannot open replay fixture for writing " + fixture.string());
}

ChatReply RecordingChatClient::complete(const nlohmann::json& request) {
    auto reply = inner_.complete(request);
    std::lock_guard lock(mu_);
    out_ << nlohmann::json{{"request_hash", request_hash(request)}, {"response", reply.content}}.dump() << '\n';
    out_.flush();
    return reply;
}

}  // namespace cobot::llm
