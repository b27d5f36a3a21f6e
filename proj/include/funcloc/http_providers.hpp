// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "funcloc/providers.hpp"

#include <chrono>
#include <string>

namespace funcloc::providers {

struct HttpSettings {
    std::string base_url;  // scheme://host[:port]
    std::chrono::seconds timeout{120};
    std::size_t max_in_flight = 4;
    RetryPolicy retry{};
};

/// Client for chat-completion endpoints speaking the common
/// `{"model", "messages", "temperature", "max_tokens"}` request shape.
class HttpChatProvider final : public ChatProvider {
public:
    HttpChatProvider(HttpSettings settings, std::string api_key, std::string path = "/v1/chat/completions");

protected:
    ChatResponse do_chat(const ChatRequest& request) override;

private:
    HttpSettings settings_;
    std::string api_key_;
    std::string path_;
};

/// Client for the embedding wire protocol:
///   GET  /info  -> {"model_id": str, "dim": int, "max_tokens": int}
///   POST /embed {"texts": [str]} -> {"vectors": [[number]]}
/// Inputs are sent in batches of at most `batch_size` texts.
class HttpEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(HttpSettings settings, std::size_t batch_size = 32);

protected:
    EmbeddingProviderInfo do_info() override;
    std::vector<std::vector<double>> do_embed(std::span<const std::string> texts) override;

private:
    HttpSettings settings_;
    std::size_t batch_size_;
};

/// Maps a chat-completions JSON body to a response; exposed for tests.
ChatResponse parse_chat_completion(std::string_view body);

}  // namespace funcloc::providers
