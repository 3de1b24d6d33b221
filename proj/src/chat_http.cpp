#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <regex>

#include "a2c/error.hpp"
#include "a2c/persona.hpp"

namespace a2c {
namespace {

constexpr const char* kStage = "chat";

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) throw UsageError(kStage, "malformed chat endpoint URL '" + url + "'");
    return {m[1].str(), m[2].matched ? m[2].str() : "/v1/chat/completions"};
}

}  // namespace

HttpChatBackend::HttpChatBackend(std::string endpoint, std::string key)
    : endpoint_(std::move(endpoint)), key_(std::move(key)) {
    parse_url(endpoint_);
}

std::unique_ptr<HttpChatBackend> HttpChatBackend::from_environment() {
    const char* endpoint = std::getenv("A2C_CHAT_ENDPOINT");
    if (!endpoint || !*endpoint) throw UsageError(kStage, "A2C_CHAT_ENDPOINT is not set");
    const char* key = std::getenv("A2C_CHAT_KEY");
    return std::make_unique<HttpChatBackend>(endpoint, key ? key : "");
}

std::string HttpChatBackend::encode_request(const ChatRequest& request) {
    nlohmann::json body;
    body["model"] = request.model;
    body["messages"] = nlohmann::json::array();
    for (const auto& m : request.messages) body["messages"].push_back({{"role", m.role}, {"content", m.text}});
    return body.dump();
}

std::string HttpChatBackend::decode_reply(std::string_view body) {
    const auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) throw Error(kStage, "reply is not JSON");
    if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
        const auto& c = j["choices"][0];
        if (c.contains("message") && c["message"].contains("content") && c["message"]["content"].is_string()) {
            return c["message"]["content"].get<std::string>();
        }
        if (c.contains("text") && c["text"].is_string()) return c["text"].get<std::string>();
    }
    if (j.contains("text") && j["text"].is_string()) return j["text"].get<std::string>();
    throw Error(kStage, "reply has no completion text");
}

std::string HttpChatBackend::complete(const ChatRequest& request) {
    const auto url = parse_url(endpoint_);
    httplib::Client client(url.origin);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!key_.empty()) headers.emplace("Authorization", "Bearer " + key_);
    auto res = client.Post(url.path, headers, encode_request(request), "application/json");
    if (!res) throw TransportError(kStage, "request to " + url.origin + " failed: " + httplib::to_string(res.error()));
    if (res->status >= 500 || res->status == 429) {
        throw TransportError(kStage, "backend returned HTTP " + std::to_string(res->status));
    }
    if (res->status != 200) throw Error(kStage, "backend returned HTTP " + std::to_string(res->status));
    return decode_reply(res->body);
}

}  // namespace a2c
