// SPDX-License-Identifier: Apache-2.0
#include "funcloc/caching_providers.hpp"

#include "funcloc/error.hpp"
#include "funcloc/util.hpp"

#include <fstream>
#include <sstream>

namespace funcloc::providers {

using nlohmann::json;

JsonlCache::JsonlCache(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.empty()) return;
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        // A torn last line from an interrupted run is skipped, not fatal.
        const auto doc = json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object() || doc.value("v", 0) != kVersion) continue;
        if (!doc.contains("model") || !doc.contains("hash") || !doc.contains("payload")) continue;
        entries_[{doc.at("model").get<std::string>(), doc.at("hash").get<std::string>()}] = doc.at("payload");
    }
}

std::optional<json> JsonlCache::get(const std::string& model, const std::string& hash) const {
    std::lock_guard lock(mutex_);
    const auto it = entries_.find({model, hash});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void JsonlCache::put(const std::string& model, const std::string& hash, json payload) {
    std::lock_guard lock(mutex_);
    const auto [it, inserted] = entries_.try_emplace({model, hash}, payload);
    if (!inserted || path_.empty()) return;
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::app);
    if (!out) throw Error(ErrorCode::Io, "cannot append to cache '" + path_.string() + "'");
    const json line = {{"v", kVersion}, {"model", model}, {"hash", hash}, {"payload", std::move(payload)}};
    out << line.dump() << '\n';
}

std::size_t JsonlCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

CachingEmbeddingProvider::CachingEmbeddingProvider(std::shared_ptr<EmbeddingProvider> inner,
                                                   std::shared_ptr<JsonlCache> cache)
    : EmbeddingProvider(1 << 16, RetryPolicy{0, {}, false}), inner_(std::move(inner)), cache_(std::move(cache)) {}

EmbeddingProviderInfo CachingEmbeddingProvider::do_info() {
    return inner_->info();
}

std::vector<std::vector<double>> CachingEmbeddingProvider::do_embed(std::span<const std::string> texts) {
    const std::string model = info().model_id;
    std::vector<std::vector<double>> out(texts.size());
    std::vector<std::string> missing;
    std::vector<std::size_t> missing_at;
    std::vector<std::string> hashes(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        hashes[i] = sha256_hex(texts[i]);
        if (auto cached = cache_->get(model, hashes[i])) {
            out[i] = cached->get<std::vector<double>>();
            ++hits_;
        } else {
            missing.push_back(texts[i]);
            missing_at.push_back(i);
        }
    }
    if (!missing.empty()) {
        misses_ += missing.size();
        auto fresh = inner_->embed(missing);
        for (std::size_t j = 0; j < fresh.size(); ++j) {
            const std::size_t i = missing_at[j];
            cache_->put(model, hashes[i], fresh[j]);
            out[i] = std::move(fresh[j]);
        }
    }
    return out;
}

CachingChatProvider::CachingChatProvider(std::shared_ptr<ChatProvider> inner, std::shared_ptr<JsonlCache> cache)
    : ChatProvider(1 << 16, RetryPolicy{0, {}, false}), inner_(std::move(inner)), cache_(std::move(cache)) {}

ChatResponse CachingChatProvider::do_chat(const ChatRequest& request) {
    std::ostringstream key;
    key << request.temperature << '\n' << request.max_output_tokens << '\n' << request.prompt;
    const std::string hash = sha256_hex(key.str());
    if (auto cached = cache_->get(request.model_id, hash)) {
        ++hits_;
        return ChatResponse{cached->at("text").get<std::string>(), cached->at("input_tokens").get<std::int64_t>(),
                            cached->at("output_tokens").get<std::int64_t>()};
    }
    ++misses_;
    auto response = inner_->chat(request);
    cache_->put(request.model_id, hash,
                {{"text", response.text},
                 {"input_tokens", response.input_tokens},
                 {"output_tokens", response.output_tokens}});
    return response;
}

}  // namespace funcloc::providers
