// SPDX-License-Identifier: Apache-2.0
#include "funcloc/retrieval.hpp"

#include "funcloc/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace funcloc::retrieval {

namespace {

struct Scored {
    double score;
    const std::string* id;
};

bool better(const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return *a.id < *b.id;
}

std::vector<RetrievalResult> top_k(std::vector<Scored> scored, std::size_t k) {
    if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
    const std::size_t n = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), better);
    std::vector<RetrievalResult> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back({*scored[i].id, scored[i].score, i + 1});
    return out;
}

bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

DenseIndex::DenseIndex(std::vector<Entry> entries, std::string bug_id)
    : bug_id_(std::move(bug_id)), entries_(std::move(entries)) {
    if (entries_.empty()) throw Error(ErrorCode::EmptyIndex, "dense index needs at least one vector");
    dim_ = entries_.front().second.dim();
    std::set<std::string_view> seen;
    for (const auto& [id, v] : entries_) {
        if (!seen.insert(id).second) throw Error(ErrorCode::DuplicateMethodId, "duplicate method id '" + id + "'");
        if (v.dim() != dim_) {
            throw Error(ErrorCode::DimensionMismatch, "method '" + id + "' has dim " + std::to_string(v.dim()) +
                                                          ", index has " + std::to_string(dim_));
        }
        double sq = 0.0;
        for (double x : v.values) sq += x * x;
        if (std::abs(std::sqrt(sq) - 1.0) > 1e-6) {
            throw Error(ErrorCode::NormalizationError, "vector of method '" + id + "' is not unit length");
        }
    }
}

std::vector<RetrievalResult> DenseIndex::query(const embedding::EmbeddingVector& q, std::size_t k) const {
    if (q.dim() != dim_) {
        throw Error(ErrorCode::DimensionMismatch,
                    "query has dim " + std::to_string(q.dim()) + ", index has " + std::to_string(dim_));
    }
    const auto unit = q.normalized ? q : embedding::normalize(q);
    std::vector<Scored> scored;
    scored.reserve(entries_.size());
    for (const auto& [id, v] : entries_) {
        double dot = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) dot += unit.values[i] * v.values[i];
        scored.push_back({dot, &id});
    }
    return top_k(std::move(scored), k);
}

std::vector<std::string> bm25_tokenize(std::string_view text) {
    std::vector<std::string> terms;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) terms.push_back(std::move(current));
        current.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (!is_alnum(c)) {
            flush();
            continue;
        }
        if (is_upper(c) && !current.empty()) {
            const char prev = text[i - 1];
            const bool after_lower = is_lower(prev) || is_digit(prev);
            const bool acronym_end = is_upper(prev) && i + 1 < text.size() && is_lower(text[i + 1]);
            if (after_lower || acronym_end) flush();
        }
        current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    flush();
    return terms;
}

Bm25Index::Bm25Index(const std::vector<Document>& documents, Bm25Params params) : params_(params) {
    if (documents.empty()) throw Error(ErrorCode::EmptyIndex, "BM25 index needs at least one document");
    if (params_.k1 < 0.0 || params_.b < 0.0 || params_.b > 1.0) {
        throw Error(ErrorCode::InvalidArgument, "BM25 needs k1 >= 0 and 0 <= b <= 1");
    }
    std::set<std::string_view> seen;
    std::size_t total = 0;
    for (const auto& [id, text] : documents) {
        if (!seen.insert(id).second) throw Error(ErrorCode::DuplicateMethodId, "duplicate method id '" + id + "'");
        Doc doc{id, {}, 0};
        for (auto& term : bm25_tokenize(text)) {
            ++doc.tf[std::move(term)];
            ++doc.length;
        }
        for (const auto& [term, _] : doc.tf) ++df_[term];
        total += doc.length;
        docs_.push_back(std::move(doc));
    }
    avg_length_ = static_cast<double>(total) / static_cast<double>(docs_.size());
}

double Bm25Index::idf(const std::string& term) const {
    const auto it = df_.find(term);
    const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
    const double n = static_cast<double>(docs_.size());
    return std::log((n - df + 0.5) / (df + 0.5));
}

std::vector<RetrievalResult> Bm25Index::query(std::string_view text, std::size_t k) const {
    const auto terms = bm25_tokenize(text);
    const std::set<std::string> unique(terms.begin(), terms.end());
    std::vector<std::pair<std::string, double>> weighted;
    for (const auto& t : unique) {
        if (df_.contains(t)) weighted.emplace_back(t, idf(t));
    }
    std::vector<Scored> scored;
    scored.reserve(docs_.size());
    for (const auto& doc : docs_) {
        double score = 0.0;
        // Only reached when some term occurs, so avg_length_ > 0 here.
        for (const auto& [term, w] : weighted) {
            const auto it = doc.tf.find(term);
            if (it == doc.tf.end()) continue;
            const double tf = static_cast<double>(it->second);
            const double norm = 1.0 - params_.b + params_.b * static_cast<double>(doc.length) / avg_length_;
            score += w * tf * (params_.k1 + 1.0) / (tf + params_.k1 * norm);
        }
        scored.push_back({score, &doc.method_id});
    }
    return top_k(std::move(scored), k);
}

std::string retrieval_dump(std::string_view bug_id, const std::vector<RetrievalResult>& results,
                           std::string_view retriever) {
    std::string out;
    for (const auto& r : results) {
        nlohmann::ordered_json line;
        line["bug_id"] = bug_id;
        line["method_id"] = r.method_id;
        line["score"] = r.score;
        line["rank"] = r.rank;
        line["retriever"] = retriever;
        out += line.dump() + "\n";
    }
    return out;
}

}  // namespace funcloc::retrieval
