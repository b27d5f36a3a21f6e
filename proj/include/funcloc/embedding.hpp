// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "funcloc/corpus.hpp"
#include "funcloc/providers.hpp"

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace funcloc::embedding {

struct EmbeddingVector {
    std::vector<double> values;
    bool normalized = false;

    std::size_t dim() const noexcept { return values.size(); }
    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

struct Chunk {
    std::string text;
    std::size_t index = 0;

    friend bool operator==(const Chunk&, const Chunk&) = default;
};

using TokenCounter = std::function<std::size_t(std::string_view)>;

/// Greedy split into pieces of at most `max_tokens` tokens. Cuts fall after
/// a newline when possible, else after whitespace, else between bytes.
/// With `overlap_tokens` > 0 each chunk after the first re-includes roughly
/// that many tokens from the end of its predecessor.
std::vector<Chunk> chunk_text(std::string_view text, std::size_t max_tokens, const TokenCounter& count_tokens,
                              std::size_t overlap_tokens = 0);

EmbeddingVector max_pool(std::span<const EmbeddingVector> vectors);

/// Throws NormalizationError for zero or non-finite input.
EmbeddingVector normalize(const EmbeddingVector& v);

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

/// Chunk by the provider's token limit, embed, max-pool, L2-normalize.
EmbeddingVector embed_text(std::string_view text, providers::EmbeddingProvider& provider);
EmbeddingVector embed_method(const corpus::MethodRecord& method, providers::EmbeddingProvider& provider);

/// One vector per method, in corpus order, computed on up to `workers`
/// threads.
std::vector<EmbeddingVector> embed_corpus(const corpus::MethodCorpus& corpus, providers::EmbeddingProvider& provider,
                                          std::size_t workers = 1);

}  // namespace funcloc::embedding
