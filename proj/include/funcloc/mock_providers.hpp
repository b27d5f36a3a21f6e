// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "funcloc/error.hpp"
#include "funcloc/providers.hpp"

#include <atomic>
#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

namespace funcloc::providers {

/// A scripted reply: fires when the prompt contains every listed substring.
struct MockRule {
    std::vector<std::string> when_contains;
    std::string reply;
};

/// Parses `{"rules": [{"when_contains": [str], "reply": str}], "default_reply": str?}`.
/// The default reply, when present, is returned through `default_reply`.
std::vector<MockRule> parse_mock_rules(std::string_view json_text, std::string* default_reply = nullptr);

/// Deterministic chat provider. Lookup order: exact prompt table, then
/// rules in insertion order, then the default reply. Token usage is the
/// byte-length estimate of prompt and reply.
class MockChatProvider final : public ChatProvider {
public:
    static constexpr std::size_t kDefaultContextTokens = 1 << 20;

    explicit MockChatProvider(std::string default_reply = "unscripted mock reply",
                              std::size_t context_tokens = kDefaultContextTokens,
                              RetryPolicy retry = {2, std::chrono::milliseconds(1), false});

    void set_reply(std::string prompt, std::string reply);
    void add_rule(MockRule rule);
    void add_rules(const std::vector<MockRule>& rules);
    /// The next calls fail with these codes, one per call, before any reply.
    void fail_next(std::vector<ErrorCode> codes);

    std::size_t calls() const noexcept { return calls_.load(); }

protected:
    ChatResponse do_chat(const ChatRequest& request) override;

private:
    std::string default_reply_;
    std::size_t context_tokens_;
    std::map<std::string, std::string> exact_;
    std::vector<MockRule> rules_;
    std::mutex failures_mutex_;
    std::deque<ErrorCode> failures_;
    std::atomic<std::size_t> calls_{0};
};

/// Deterministic embedding provider: L2-normalized counts of seeded hashes
/// of lowercase character trigrams (the text is padded with one space on
/// each side so every non-empty text has at least one trigram).
class MockEmbeddingProvider final : public EmbeddingProvider {
public:
    static constexpr int kDim = 64;
    static constexpr int kMaxTokens = 128;
    static constexpr std::uint64_t kDefaultSeed = 42;

    explicit MockEmbeddingProvider(std::uint64_t seed = kDefaultSeed, int dim = kDim, int max_tokens = kMaxTokens);

    std::size_t embed_calls() const noexcept { return embed_calls_.load(); }
    std::size_t texts_embedded() const noexcept { return texts_embedded_.load(); }

    /// The vector this provider returns for `text`, exposed for oracles.
    std::vector<double> vector_for(std::string_view text) const;

protected:
    EmbeddingProviderInfo do_info() override;
    std::vector<std::vector<double>> do_embed(std::span<const std::string> texts) override;

private:
    std::uint64_t seed_;
    int dim_;
    int max_tokens_;
    std::atomic<std::size_t> embed_calls_{0};
    std::atomic<std::size_t> texts_embedded_{0};
};

}  // namespace funcloc::providers
