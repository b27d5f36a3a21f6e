// SPDX-License-Identifier: Apache-2.0
#include "funcloc/http_providers.hpp"

#include "funcloc/error.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>

namespace funcloc::providers {

using nlohmann::json;

namespace {

httplib::Client make_client(const HttpSettings& s) {
    httplib::Client client(s.base_url);
    client.set_connection_timeout(std::min<std::chrono::seconds>(s.timeout, std::chrono::seconds(10)));
    client.set_read_timeout(s.timeout);
    client.set_write_timeout(s.timeout);
    return client;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

[[noreturn]] void throw_for_status(const httplib::Result& res, const std::string& what) {
    if (!res) {
        throw Error(ErrorCode::ProviderUnavailable, what + ": " + httplib::to_string(res.error()));
    }
    const int status = res->status;
    const std::string body = lower(res->body);
    if (status == 429) {
        throw Error(ErrorCode::RateLimited, what + ": HTTP 429");
    }
    if ((status == 400 || status == 413) &&
        (body.find("context_length_exceeded") != std::string::npos ||
         body.find("context length") != std::string::npos ||
         body.find("maximum context") != std::string::npos)) {
        throw Error(ErrorCode::ContextOverflow, what + ": prompt exceeds the model context");
    }
    throw Error(ErrorCode::ProviderUnavailable, what + ": HTTP " + std::to_string(status));
}

}  // namespace

ChatResponse parse_chat_completion(std::string_view body) {
    try {
        const auto doc = json::parse(body);
        ChatResponse out;
        const auto& message = doc.at("choices").at(0).at("message");
        if (message.contains("content") && message.at("content").is_string()) {
            out.text = message.at("content").get<std::string>();
        }
        if (doc.contains("usage") && doc.at("usage").is_object()) {
            const auto& usage = doc.at("usage");
            out.input_tokens = usage.value("prompt_tokens", std::int64_t{0});
            out.output_tokens = usage.value("completion_tokens", std::int64_t{0});
        }
        return out;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ProviderUnavailable, std::string("malformed chat completion: ") + e.what());
    }
}

HttpChatProvider::HttpChatProvider(HttpSettings settings, std::string api_key, std::string path)
    : ChatProvider(settings.max_in_flight, settings.retry),
      settings_(std::move(settings)),
      api_key_(std::move(api_key)),
      path_(std::move(path)) {}

ChatResponse HttpChatProvider::do_chat(const ChatRequest& request) {
    json payload = {
        {"model", request.model_id},
        {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
        {"temperature", request.temperature},
        {"max_tokens", request.max_output_tokens},
    };
    auto client = make_client(settings_);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    const auto res = client.Post(path_, headers, payload.dump(), "application/json");
    if (!res || res->status != 200) throw_for_status(res, "chat " + settings_.base_url + path_);
    return parse_chat_completion(res->body);
}

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpSettings settings, std::size_t batch_size)
    : EmbeddingProvider(settings.max_in_flight, settings.retry),
      settings_(std::move(settings)),
      batch_size_(std::max<std::size_t>(1, batch_size)) {}

EmbeddingProviderInfo HttpEmbeddingProvider::do_info() {
    auto client = make_client(settings_);
    const auto res = client.Get("/info");
    if (!res || res->status != 200) throw_for_status(res, "embedding info " + settings_.base_url);
    try {
        const auto doc = json::parse(res->body);
        return {doc.at("model_id").get<std::string>(), doc.at("dim").get<int>(), doc.at("max_tokens").get<int>()};
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ProviderUnavailable, std::string("malformed /info payload: ") + e.what());
    }
}

std::vector<std::vector<double>> HttpEmbeddingProvider::do_embed(std::span<const std::string> texts) {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    auto client = make_client(settings_);
    for (std::size_t begin = 0; begin < texts.size(); begin += batch_size_) {
        const auto batch = texts.subspan(begin, std::min(batch_size_, texts.size() - begin));
        const json payload = {{"texts", std::vector<std::string>(batch.begin(), batch.end())}};
        const auto res = client.Post("/embed", payload.dump(), "application/json");
        if (!res || res->status != 200) throw_for_status(res, "embed " + settings_.base_url);
        try {
            const auto doc = json::parse(res->body);
            for (const auto& v : doc.at("vectors")) out.push_back(v.get<std::vector<double>>());
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ProviderUnavailable, std::string("malformed /embed payload: ") + e.what());
        }
    }
    return out;
}

}  // namespace funcloc::providers
