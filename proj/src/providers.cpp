// SPDX-License-Identifier: Apache-2.0
#include "funcloc/providers.hpp"

#include "funcloc/error.hpp"

#include <algorithm>
#include <thread>

namespace funcloc::providers {

std::size_t estimate_tokens(std::string_view text) noexcept {
    return (text.size() + 3) / 4;
}

InFlightLimiter::InFlightLimiter(std::size_t max_in_flight)
    : limit_(std::max<std::size_t>(1, max_in_flight)),
      slots_(static_cast<std::ptrdiff_t>(limit_)) {}

InFlightLimiter::Permit::Permit(InFlightLimiter& owner) : owner_(owner) {
    owner_.slots_.acquire();
    std::lock_guard lock(owner_.mutex_);
    owner_.peak_ = std::max(owner_.peak_, ++owner_.active_);
}

InFlightLimiter::Permit::~Permit() {
    {
        std::lock_guard lock(owner_.mutex_);
        --owner_.active_;
    }
    owner_.slots_.release();
}

std::size_t InFlightLimiter::peak() const {
    std::lock_guard lock(mutex_);
    return peak_;
}

namespace {

template <typename Fn>
auto with_retries(const RetryPolicy& policy, Fn&& fn) {
    for (int attempt = 0;; ++attempt) {
        try {
            return fn();
        } catch (const Error& e) {
            const bool retryable = e.code() == ErrorCode::RateLimited ||
                                   (policy.retry_unavailable && e.code() == ErrorCode::ProviderUnavailable);
            if (!retryable || attempt >= policy.max_retries) throw;
            std::this_thread::sleep_for(policy.base_delay * (1 << attempt));
        }
    }
}

}  // namespace

ChatProvider::ChatProvider(std::size_t max_in_flight, RetryPolicy retry)
    : limiter_(max_in_flight), retry_(retry) {}

ChatResponse ChatProvider::chat(const ChatRequest& request) {
    if (request.prompt.empty()) {
        throw Error(ErrorCode::InvalidArgument, "chat prompt is empty");
    }
    if (!(request.temperature >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "temperature must be >= 0");
    }
    if (request.max_output_tokens < 1) {
        throw Error(ErrorCode::InvalidArgument, "max_output_tokens must be positive");
    }
    return with_retries(retry_, [&] {
        InFlightLimiter::Permit permit(limiter_);
        auto response = do_chat(request);
        if (response.input_tokens < 0 || response.output_tokens < 0) {
            throw Error(ErrorCode::ProviderUnavailable, "provider reported negative token usage");
        }
        return response;
    });
}

EmbeddingProvider::EmbeddingProvider(std::size_t max_in_flight, RetryPolicy retry)
    : limiter_(max_in_flight), retry_(retry) {}

EmbeddingProviderInfo EmbeddingProvider::info() {
    std::lock_guard lock(info_mutex_);
    if (!info_) {
        auto fetched = with_retries(retry_, [&] {
            InFlightLimiter::Permit permit(limiter_);
            return do_info();
        });
        if (fetched.dim < 1 || fetched.max_tokens < 1) {
            throw Error(ErrorCode::ProviderUnavailable, "provider info has non-positive dim or max_tokens");
        }
        info_ = std::move(fetched);
    }
    return *info_;
}

std::vector<std::vector<double>> EmbeddingProvider::embed(std::span<const std::string> texts) {
    if (texts.empty()) return {};
    for (const auto& t : texts) {
        if (t.empty()) throw Error(ErrorCode::InvalidArgument, "cannot embed empty text");
    }
    const auto expected_dim = static_cast<std::size_t>(info().dim);
    auto vectors = with_retries(retry_, [&] {
        InFlightLimiter::Permit permit(limiter_);
        return do_embed(texts);
    });
    if (vectors.size() != texts.size()) {
        throw Error(ErrorCode::DimensionMismatch, "provider returned " + std::to_string(vectors.size()) +
                                                      " vectors for " + std::to_string(texts.size()) + " texts");
    }
    for (const auto& v : vectors) {
        if (v.size() != expected_dim) {
            throw Error(ErrorCode::DimensionMismatch, "provider returned dim " + std::to_string(v.size()) +
                                                          ", info says " + std::to_string(expected_dim));
        }
    }
    return vectors;
}

}  // namespace funcloc::providers
