// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "funcloc/providers.hpp"

#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>

namespace funcloc::providers {

/// Append-only JSON-lines store. Each line is an object with "v" (format
/// version), "model", "hash" and a payload; lines of other versions are
/// ignored on load. An empty path keeps the store in memory only.
class JsonlCache {
public:
    static constexpr int kVersion = 1;

    explicit JsonlCache(std::filesystem::path path = {});

    std::optional<nlohmann::json> get(const std::string& model, const std::string& hash) const;
    void put(const std::string& model, const std::string& hash, nlohmann::json payload);
    std::size_t size() const;

private:
    std::filesystem::path path_;
    mutable std::mutex mutex_;
    std::map<std::pair<std::string, std::string>, nlohmann::json> entries_;
};

/// Serves embeddings from a (model_id, sha256(text)) cache and forwards
/// only misses to the wrapped provider.
class CachingEmbeddingProvider final : public EmbeddingProvider {
public:
    CachingEmbeddingProvider(std::shared_ptr<EmbeddingProvider> inner, std::shared_ptr<JsonlCache> cache);

    std::size_t count_tokens(std::string_view text) const override { return inner_->count_tokens(text); }
    std::size_t hits() const noexcept { return hits_.load(); }
    std::size_t misses() const noexcept { return misses_.load(); }

protected:
    EmbeddingProviderInfo do_info() override;
    std::vector<std::vector<double>> do_embed(std::span<const std::string> texts) override;

private:
    std::shared_ptr<EmbeddingProvider> inner_;
    std::shared_ptr<JsonlCache> cache_;
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> misses_{0};
};

/// Serves chat responses, including their recorded token usage, from a
/// cache keyed by model id and a hash of the full request.
class CachingChatProvider final : public ChatProvider {
public:
    CachingChatProvider(std::shared_ptr<ChatProvider> inner, std::shared_ptr<JsonlCache> cache);

    std::size_t hits() const noexcept { return hits_.load(); }
    std::size_t misses() const noexcept { return misses_.load(); }

protected:
    ChatResponse do_chat(const ChatRequest& request) override;

private:
    std::shared_ptr<ChatProvider> inner_;
    std::shared_ptr<JsonlCache> cache_;
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> misses_{0};
};

}  // namespace funcloc::providers
