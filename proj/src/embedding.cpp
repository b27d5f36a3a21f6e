// SPDX-License-Identifier: Apache-2.0
#include "funcloc/embedding.hpp"

#include "funcloc/error.hpp"
#include "funcloc/util.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace funcloc::embedding {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Longest cut in [min_end, text.size()] such that text[start, cut) fits,
// preferring cuts right after a newline, then after whitespace.
std::size_t find_cut(std::string_view text, std::size_t start, std::size_t min_end, std::size_t max_tokens,
                     const TokenCounter& count_tokens) {
    auto fits = [&](std::size_t end) { return count_tokens(text.substr(start, end - start)) <= max_tokens; };
    if (fits(text.size())) return text.size();

    std::size_t best_line = 0;
    std::size_t best_space = 0;
    std::size_t best_any = 0;
    for (std::size_t end = min_end; end < text.size(); ++end) {
        if (!fits(end)) break;
        best_any = end;
        const char last = text[end - 1];
        if (last == '\n') best_line = end;
        if (is_space(last)) best_space = end;
    }
    if (best_line) return best_line;
    if (best_space) return best_space;
    // A single byte over the limit still has to make progress.
    return best_any ? best_any : min_end;
}

void require_same_dim(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "vectors of dim " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
    }
}

double norm(const EmbeddingVector& v) {
    double sum = 0.0;
    for (double x : v.values) sum += x * x;
    return std::sqrt(sum);
}

}  // namespace

std::vector<Chunk> chunk_text(std::string_view text, std::size_t max_tokens, const TokenCounter& count_tokens,
                              std::size_t overlap_tokens) {
    if (max_tokens == 0) throw Error(ErrorCode::InvalidArgument, "max_tokens must be at least 1");
    if (overlap_tokens >= max_tokens) {
        throw Error(ErrorCode::InvalidArgument, "chunk overlap must be smaller than max_tokens");
    }
    std::vector<Chunk> chunks;
    std::size_t start = 0;
    std::size_t covered = 0;  // end of the previous chunk
    while (covered < text.size()) {
        const std::size_t end = find_cut(text, start, covered + 1, max_tokens, count_tokens);
        chunks.push_back({std::string(text.substr(start, end - start)), chunks.size()});
        covered = end;
        if (overlap_tokens == 0 || end == text.size()) {
            start = end;
            continue;
        }
        std::size_t back = end;
        while (back > start + 1 && count_tokens(text.substr(back - 1, end - back + 1)) <= overlap_tokens) --back;
        start = back;
    }
    return chunks;
}

EmbeddingVector max_pool(std::span<const EmbeddingVector> vectors) {
    if (vectors.empty()) throw Error(ErrorCode::EmptyInput, "max_pool needs at least one vector");
    EmbeddingVector out{vectors.front().values, false};
    for (const auto& v : vectors.subspan(1)) {
        require_same_dim(out, v);
        for (std::size_t i = 0; i < v.dim(); ++i) out.values[i] = std::max(out.values[i], v.values[i]);
    }
    return out;
}

EmbeddingVector normalize(const EmbeddingVector& v) {
    for (double x : v.values) {
        if (!std::isfinite(x)) throw Error(ErrorCode::NormalizationError, "vector has a non-finite entry");
    }
    const double n = norm(v);
    if (n == 0.0) throw Error(ErrorCode::NormalizationError, "cannot normalize a zero vector");
    EmbeddingVector out{v.values, true};
    for (double& x : out.values) x /= n;
    return out;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    require_same_dim(a, b);
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
    double dot = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) dot += a.values[i] * b.values[i];
    return std::clamp(dot / (na * nb), -1.0, 1.0);
}

EmbeddingVector embed_text(std::string_view text, providers::EmbeddingProvider& provider) {
    if (text.empty()) throw Error(ErrorCode::EmptyInput, "cannot embed empty text");
    const auto info = provider.info();
    const auto chunks = chunk_text(text, static_cast<std::size_t>(info.max_tokens),
                                   [&](std::string_view s) { return provider.count_tokens(s); });
    std::vector<std::string> texts;
    texts.reserve(chunks.size());
    for (const auto& c : chunks) texts.push_back(c.text);
    const auto raw = provider.embed(texts);
    std::vector<EmbeddingVector> vectors;
    vectors.reserve(raw.size());
    for (const auto& r : raw) vectors.push_back({r, false});
    if (vectors.size() == 1) return normalize(vectors.front());
    return normalize(max_pool(vectors));
}

EmbeddingVector embed_method(const corpus::MethodRecord& method, providers::EmbeddingProvider& provider) {
    return embed_text(method.source_text, provider);
}

std::vector<EmbeddingVector> embed_corpus(const corpus::MethodCorpus& corpus, providers::EmbeddingProvider& provider,
                                          std::size_t workers) {
    std::vector<EmbeddingVector> out(corpus.methods.size());
    parallel_for(corpus.methods.size(), workers,
                 [&](std::size_t i) { out[i] = embed_method(corpus.methods[i], provider); });
    return out;
}

}  // namespace funcloc::embedding
