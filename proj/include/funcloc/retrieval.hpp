// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "funcloc/embedding.hpp"

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace funcloc::retrieval {

struct RetrievalResult {
    std::string method_id;
    double score = 0.0;
    std::size_t rank = 0;  // 1-based

    friend bool operator==(const RetrievalResult&, const RetrievalResult&) = default;
};

/// Exact cosine search over normalized vectors.
class DenseIndex {
public:
    using Entry = std::pair<std::string, embedding::EmbeddingVector>;

    /// Throws EmptyIndex, DuplicateMethodId, DimensionMismatch, or
    /// NormalizationError for a vector that is not unit length.
    explicit DenseIndex(std::vector<Entry> entries, std::string bug_id = {});

    /// min(k, size()) results, score descending, ties by method_id.
    std::vector<RetrievalResult> query(const embedding::EmbeddingVector& q, std::size_t k) const;

    std::size_t size() const noexcept { return entries_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    const std::string& bug_id() const noexcept { return bug_id_; }

private:
    std::string bug_id_;
    std::vector<Entry> entries_;
    std::size_t dim_ = 0;
};

/// Lowercased terms; splits on non-alphanumerics and camelCase or acronym
/// boundaries. Digits stay attached to the preceding letters.
std::vector<std::string> bm25_tokenize(std::string_view text);

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;

    friend bool operator==(const Bm25Params&, const Bm25Params&) = default;
};

/// Okapi BM25 with idf = ln((N - df + 0.5) / (df + 0.5)). Each distinct
/// query term contributes once.
class Bm25Index {
public:
    using Document = std::pair<std::string, std::string>;  // (method_id, text)

    explicit Bm25Index(const std::vector<Document>& documents, Bm25Params params = {});

    std::vector<RetrievalResult> query(std::string_view text, std::size_t k) const;

    double idf(const std::string& term) const;
    double average_length() const noexcept { return avg_length_; }
    std::size_t size() const noexcept { return docs_.size(); }
    const Bm25Params& params() const noexcept { return params_; }

private:
    struct Doc {
        std::string method_id;
        std::map<std::string, std::size_t> tf;
        std::size_t length = 0;
    };
    Bm25Params params_;
    std::vector<Doc> docs_;
    std::map<std::string, std::size_t> df_;
    double avg_length_ = 0.0;
};

/// One JSON object per line: bug_id, method_id, score, rank, retriever.
std::string retrieval_dump(std::string_view bug_id, const std::vector<RetrievalResult>& results,
                           std::string_view retriever);

}  // namespace funcloc::retrieval
