// SPDX-License-Identifier: Apache-2.0
#include "funcloc/mock_providers.hpp"

#include <json.hpp>

#include <cctype>
#include <cmath>

namespace funcloc::providers {

using nlohmann::json;

std::vector<MockRule> parse_mock_rules(std::string_view json_text, std::string* default_reply) {
    std::vector<MockRule> rules;
    try {
        const auto doc = json::parse(json_text);
        for (const auto& r : doc.value("rules", json::array())) {
            MockRule rule;
            const auto& cond = r.at("when_contains");
            if (cond.is_string()) {
                rule.when_contains.push_back(cond.get<std::string>());
            } else {
                rule.when_contains = cond.get<std::vector<std::string>>();
            }
            rule.reply = r.at("reply").get<std::string>();
            rules.push_back(std::move(rule));
        }
        if (default_reply && doc.contains("default_reply")) {
            *default_reply = doc.at("default_reply").get<std::string>();
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("mock rules: ") + e.what());
    }
    return rules;
}

MockChatProvider::MockChatProvider(std::string default_reply, std::size_t context_tokens, RetryPolicy retry)
    : ChatProvider(16, retry), default_reply_(std::move(default_reply)), context_tokens_(context_tokens) {}

void MockChatProvider::set_reply(std::string prompt, std::string reply) {
    exact_[std::move(prompt)] = std::move(reply);
}

void MockChatProvider::add_rule(MockRule rule) {
    rules_.push_back(std::move(rule));
}

void MockChatProvider::add_rules(const std::vector<MockRule>& rules) {
    rules_.insert(rules_.end(), rules.begin(), rules.end());
}

void MockChatProvider::fail_next(std::vector<ErrorCode> codes) {
    std::lock_guard lock(failures_mutex_);
    failures_.insert(failures_.end(), codes.begin(), codes.end());
}

ChatResponse MockChatProvider::do_chat(const ChatRequest& request) {
    ++calls_;
    {
        std::lock_guard lock(failures_mutex_);
        if (!failures_.empty()) {
            const auto code = failures_.front();
            failures_.pop_front();
            throw Error(code, "scripted mock failure");
        }
    }
    const auto input_tokens = estimate_tokens(request.prompt);
    if (input_tokens > context_tokens_) {
        throw Error(ErrorCode::ContextOverflow, "prompt of " + std::to_string(input_tokens) +
                                                    " tokens exceeds context of " + std::to_string(context_tokens_));
    }
    const std::string* reply = &default_reply_;
    if (const auto it = exact_.find(request.prompt); it != exact_.end()) {
        reply = &it->second;
    } else {
        for (const auto& rule : rules_) {
            bool all = true;
            for (const auto& needle : rule.when_contains) {
                if (request.prompt.find(needle) == std::string::npos) {
                    all = false;
                    break;
                }
            }
            if (all) {
                reply = &rule.reply;
                break;
            }
        }
    }
    return ChatResponse{*reply, static_cast<std::int64_t>(input_tokens),
                        static_cast<std::int64_t>(estimate_tokens(*reply))};
}

MockEmbeddingProvider::MockEmbeddingProvider(std::uint64_t seed, int dim, int max_tokens)
    : EmbeddingProvider(8, RetryPolicy{0, std::chrono::milliseconds(0), false}),
      seed_(seed), dim_(dim), max_tokens_(max_tokens) {}

EmbeddingProviderInfo MockEmbeddingProvider::do_info() {
    return {"mock-trigram-" + std::to_string(dim_) + "-seed" + std::to_string(seed_), dim_, max_tokens_};
}

std::vector<double> MockEmbeddingProvider::vector_for(std::string_view text) const {
    std::string padded = " ";
    for (char c : text) padded.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    padded.push_back(' ');

    std::vector<double> v(static_cast<std::size_t>(dim_), 0.0);
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
        // FNV-1a over the seed bytes then the trigram bytes.
        std::uint64_t h = 14695981039346656037ULL;
        for (int b = 0; b < 8; ++b) {
            h ^= (seed_ >> (8 * b)) & 0xffU;
            h *= 1099511628211ULL;
        }
        for (std::size_t k = i; k < i + 3; ++k) {
            h ^= static_cast<unsigned char>(padded[k]);
            h *= 1099511628211ULL;
        }
        v[h % static_cast<std::uint64_t>(dim_)] += 1.0;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

std::vector<std::vector<double>> MockEmbeddingProvider::do_embed(std::span<const std::string> texts) {
    ++embed_calls_;
    texts_embedded_ += texts.size();
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(vector_for(t));
    return out;
}

}  // namespace funcloc::providers
