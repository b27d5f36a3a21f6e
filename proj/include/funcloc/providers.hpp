// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace funcloc::providers {

struct ChatRequest {
    std::string model_id;
    std::string prompt;
    double temperature = 0.0;
    int max_output_tokens = 2048;
};

struct ChatResponse {
    std::string text;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;

    friend bool operator==(const ChatResponse&, const ChatResponse&) = default;
};

/// Token usage accumulated across one or more chat calls.
struct Usage {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;

    Usage& operator+=(const Usage& other) noexcept {
        input_tokens += other.input_tokens;
        output_tokens += other.output_tokens;
        return *this;
    }
    friend Usage operator+(Usage a, const Usage& b) noexcept { return a += b; }
    friend bool operator==(const Usage&, const Usage&) = default;
};

inline Usage usage_of(const ChatResponse& r) noexcept { return {r.input_tokens, r.output_tokens}; }

struct EmbeddingProviderInfo {
    std::string model_id;
    int dim = 0;
    int max_tokens = 0;

    friend bool operator==(const EmbeddingProviderInfo&, const EmbeddingProviderInfo&) = default;
};

/// Retries apply to RateLimited only, unless `retry_unavailable` is set.
struct RetryPolicy {
    int max_retries = 2;
    std::chrono::milliseconds base_delay{500};
    bool retry_unavailable = false;
};

/// Conservative token estimate used when a provider exposes no tokenizer:
/// one token per four bytes, rounded up.
std::size_t estimate_tokens(std::string_view text) noexcept;

/// Bounds the number of concurrent calls into one provider.
class InFlightLimiter {
public:
    explicit InFlightLimiter(std::size_t max_in_flight);

    class Permit {
    public:
        explicit Permit(InFlightLimiter& owner);
        ~Permit();
        Permit(const Permit&) = delete;
        Permit& operator=(const Permit&) = delete;

    private:
        InFlightLimiter& owner_;
    };

    std::size_t limit() const noexcept { return limit_; }
    std::size_t peak() const;

private:
    std::size_t limit_;
    std::counting_semaphore<> slots_;
    mutable std::mutex mutex_;
    std::size_t active_ = 0;
    std::size_t peak_ = 0;
};

/// Chat-completion contract. `chat()` validates the request, enforces the
/// in-flight limit and applies the retry policy around `do_chat()`.
class ChatProvider {
public:
    explicit ChatProvider(std::size_t max_in_flight = 4, RetryPolicy retry = {});
    virtual ~ChatProvider() = default;
    ChatProvider(const ChatProvider&) = delete;
    ChatProvider& operator=(const ChatProvider&) = delete;

    ChatResponse chat(const ChatRequest& request);

    const InFlightLimiter& limiter() const noexcept { return limiter_; }

protected:
    virtual ChatResponse do_chat(const ChatRequest& request) = 0;

private:
    InFlightLimiter limiter_;
    RetryPolicy retry_;
};

/// Embedding contract. `embed()` checks that one vector of `info().dim`
/// entries comes back per input text, in order.
class EmbeddingProvider {
public:
    explicit EmbeddingProvider(std::size_t max_in_flight = 4, RetryPolicy retry = {});
    virtual ~EmbeddingProvider() = default;
    EmbeddingProvider(const EmbeddingProvider&) = delete;
    EmbeddingProvider& operator=(const EmbeddingProvider&) = delete;

    /// Fetched once and then served from memory.
    EmbeddingProviderInfo info();

    std::vector<std::vector<double>> embed(std::span<const std::string> texts);

    virtual std::size_t count_tokens(std::string_view text) const { return estimate_tokens(text); }

    const InFlightLimiter& limiter() const noexcept { return limiter_; }

protected:
    virtual EmbeddingProviderInfo do_info() = 0;
    virtual std::vector<std::vector<double>> do_embed(std::span<const std::string> texts) = 0;

private:
    InFlightLimiter limiter_;
    RetryPolicy retry_;
    std::mutex info_mutex_;
    std::optional<EmbeddingProviderInfo> info_;
};

}  // namespace funcloc::providers
