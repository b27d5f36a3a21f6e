// SPDX-License-Identifier: Apache-2.0
#include "funcloc/retrieval.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace funcloc;
using namespace funcloc::retrieval;
using embedding::EmbeddingVector;
using funcloc::testing::code_of;

namespace {

EmbeddingVector unit(std::vector<double> v) {
    return embedding::normalize({std::move(v), false});
}

std::vector<double> random_vector(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> val(0.0, 1.0);
    std::vector<double> v(dim);
    for (auto& x : v) x = val(rng);
    return v;
}

// Brute force: cosine from raw vectors, full sort, take k.
std::vector<std::pair<std::string, double>> exhaustive(const std::vector<std::pair<std::string, std::vector<double>>>& raw,
                                                       const std::vector<double>& q, std::size_t k) {
    std::vector<std::pair<std::string, double>> all;
    for (const auto& [id, v] : raw) {
        double dot = 0, na = 0, nb = 0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            dot += v[i] * q[i];
            na += v[i] * v[i];
            nb += q[i] * q[i];
        }
        all.emplace_back(id, dot / std::sqrt(na * nb));
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    all.resize(std::min(k, all.size()));
    return all;
}

// Reference BM25 over space-separated lowercase words, written without the
// index's data structures.
std::vector<std::pair<std::string, double>> reference_bm25(const std::vector<std::pair<std::string, std::string>>& docs,
                                                           const std::string& query) {
    auto words = [](const std::string& s) {
        std::istringstream in(s);
        std::vector<std::string> out;
        for (std::string w; in >> w;) out.push_back(w);
        return out;
    };
    std::vector<std::vector<std::string>> tokenized;
    double total = 0;
    for (const auto& d : docs) {
        tokenized.push_back(words(d.second));
        total += static_cast<double>(tokenized.back().size());
    }
    const double n = static_cast<double>(docs.size());
    const double avg = total / n;
    auto q = words(query);
    std::sort(q.begin(), q.end());
    q.erase(std::unique(q.begin(), q.end()), q.end());
    std::vector<std::pair<std::string, double>> scores;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        double s = 0;
        for (const auto& term : q) {
            double df = 0;
            for (const auto& other : tokenized) df += std::count(other.begin(), other.end(), term) > 0 ? 1 : 0;
            const double tf = static_cast<double>(std::count(tokenized[d].begin(), tokenized[d].end(), term));
            if (tf == 0) continue;
            const double len = static_cast<double>(tokenized[d].size());
            s += std::log((n - df + 0.5) / (df + 0.5)) * tf * 2.2 / (tf + 1.2 * (0.25 + 0.75 * len / avg));
        }
        scores.emplace_back(docs[d].first, s);
    }
    std::stable_sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    return scores;
}

const std::vector<Bm25Index::Document> kThreeDocs{
    {"d1", "parse json array"},
    {"d2", "parse xml"},
    {"d3", "write file output stream"},
};

}  // namespace

TEST(DenseIndex, BuildErrors) {
    EXPECT_EQ(code_of([] { DenseIndex({}); }), ErrorCode::EmptyIndex);
    EXPECT_EQ(code_of([] { DenseIndex({{"a", unit({1, 0})}, {"a", unit({0, 1})}}); }), ErrorCode::DuplicateMethodId);
    EXPECT_EQ(code_of([] { DenseIndex({{"a", unit({1, 0})}, {"b", unit({0, 1, 0})}}); }), ErrorCode::DimensionMismatch);
    EXPECT_EQ(code_of([] { DenseIndex({{"a", {{2, 0}, false}}}); }), ErrorCode::NormalizationError);
}

TEST(DenseIndex, ThreeVectorsOfDim64) {
    std::mt19937_64 rng(1);
    const DenseIndex index({{"a", unit(random_vector(rng, 64))},
                            {"b", unit(random_vector(rng, 64))},
                            {"c", unit(random_vector(rng, 64))}});
    EXPECT_EQ(index.size(), 3u);
    EXPECT_EQ(index.dim(), 64u);
}

TEST(DenseIndex, KLargerThanCorpusReturnsAll) {
    const DenseIndex index({{"a", unit({1, 0})}, {"b", unit({0, 1})}, {"c", unit({1, 1})}});
    const auto results = index.query(unit({1, 0.1}), 40);
    ASSERT_EQ(results.size(), 3u);
    EXPECT_EQ(results[0].method_id, "a");
    EXPECT_EQ(results[1].method_id, "c");
    EXPECT_EQ(results[2].method_id, "b");
    for (std::size_t i = 0; i < results.size(); ++i) EXPECT_EQ(results[i].rank, i + 1);
}

TEST(DenseIndex, ExactMatchRanksFirstWithScoreOne) {
    std::mt19937_64 rng(2);
    std::vector<DenseIndex::Entry> entries;
    for (int i = 0; i < 20; ++i) entries.emplace_back("m" + std::to_string(i), unit(random_vector(rng, 64)));
    const auto target = entries[13].second;
    const DenseIndex index(entries);
    const auto results = index.query(target, 5);
    EXPECT_EQ(results[0].method_id, "m13");
    EXPECT_NEAR(results[0].score, 1.0, 1e-12);
}

TEST(DenseIndex, TiesBreakByMethodId) {
    const DenseIndex index({{"zeta", unit({1, 0})}, {"alpha", unit({1, 0})}, {"mid", unit({0, 1})}});
    const auto results = index.query(unit({1, 0}), 3);
    EXPECT_EQ(results[0].method_id, "alpha");
    EXPECT_EQ(results[1].method_id, "zeta");
}

TEST(DenseIndex, QueryErrors) {
    const DenseIndex index({{"a", unit({1, 0})}});
    EXPECT_EQ(code_of([&] { index.query(unit({1, 0, 0}), 1); }), ErrorCode::DimensionMismatch);
    EXPECT_EQ(code_of([&] { index.query(unit({1, 0}), 0); }), ErrorCode::InvalidArgument);
}

TEST(DenseIndex, MatchesExhaustiveSortOnThousandMethods) {
    std::mt19937_64 rng(3);
    std::vector<std::pair<std::string, std::vector<double>>> raw;
    std::vector<DenseIndex::Entry> entries;
    for (int i = 0; i < 1000; ++i) {
        raw.emplace_back("C#m" + std::to_string(i), random_vector(rng, 64));
        entries.emplace_back(raw.back().first, unit(raw.back().second));
    }
    const auto q = random_vector(rng, 64);
    const DenseIndex index(entries);
    const auto got = index.query({q, false}, 40);
    const auto want = exhaustive(raw, q, 40);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].method_id, want[i].first);
        EXPECT_NEAR(got[i].score, want[i].second, 1e-9);
    }
}

TEST(DenseIndex, ExactnessAndPrefixProperty) {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> size(1, 300), kdist(1, 60);
    for (int c = 0; c < 100; ++c) {
        std::vector<std::pair<std::string, std::vector<double>>> raw;
        std::vector<DenseIndex::Entry> entries;
        const int n = size(rng);
        for (int i = 0; i < n; ++i) {
            raw.emplace_back("m" + std::to_string(i), random_vector(rng, 16));
            entries.emplace_back(raw.back().first, unit(raw.back().second));
        }
        const DenseIndex index(entries);
        const auto q = random_vector(rng, 16);
        const std::size_t a = kdist(rng), b = a + kdist(rng);
        const auto small = index.query({q, false}, a);
        const auto large = index.query({q, false}, b);
        ASSERT_EQ(small.size(), std::min<std::size_t>(a, n));
        ASSERT_TRUE(std::equal(small.begin(), small.end(), large.begin()));
        const auto want = exhaustive(raw, q, b);
        ASSERT_EQ(large.size(), want.size());
        for (std::size_t i = 0; i < large.size(); ++i) {
            ASSERT_EQ(large[i].method_id, want[i].first);
            ASSERT_NEAR(large[i].score, want[i].second, 1e-9);
        }
    }
}

TEST(Bm25Tokenize, Rules) {
    EXPECT_EQ(bm25_tokenize("parseJsonArray"), (std::vector<std::string>{"parse", "json", "array"}));
    EXPECT_EQ(bm25_tokenize("foo_bar2"), (std::vector<std::string>{"foo", "bar2"}));
    EXPECT_TRUE(bm25_tokenize("").empty());
    EXPECT_EQ(bm25_tokenize("JSONArray.get(x2Y)"), (std::vector<std::string>{"json", "array", "get", "x2", "y"}));
    EXPECT_TRUE(bm25_tokenize("  --- ()").empty());
}

TEST(Bm25, NoSharedTermsScoreZero) {
    const Bm25Index index(kThreeDocs);
    for (const auto& r : index.query("network socket", 10)) EXPECT_EQ(r.score, 0.0);
    const auto empty = index.query("", 10);
    ASSERT_EQ(empty.size(), 3u);
    EXPECT_EQ(empty[0].method_id, "d1");
    EXPECT_EQ(empty[2].method_id, "d3");
}

TEST(Bm25, SingleDocumentHandValue) {
    // N = 1, df = 1: idf = ln(0.5 / 1.5). tf = 1 and dl = avgdl, so the tf
    // factor is 2.2 / 2.2 and the score is ln(1/3).
    const Bm25Index index(std::vector<Bm25Index::Document>{{"only", "parse json"}});
    const auto r = index.query("json", 1);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_NEAR(r[0].score, -1.0986122886681098, 1e-9);
}

TEST(Bm25, ThreeDocumentHandValues) {
    // N = 3, avgdl = 9 / 3 = 3. Every query term below has df = 1, so
    // idf = ln(2.5 / 1.5) = ln(5/3).
    const Bm25Index index(kThreeDocs);
    EXPECT_DOUBLE_EQ(index.average_length(), 3.0);

    // d1 has length 3 = avgdl, so each matching term adds exactly idf.
    const auto json = index.query("json array", 3);
    EXPECT_EQ(json[0].method_id, "d1");
    EXPECT_NEAR(json[0].score, 1.0216512475319814, 1e-9);
    EXPECT_EQ(json[1].score, 0.0);
    EXPECT_EQ(json[2].score, 0.0);

    // d2: length 2, norm 0.25 + 0.75 * 2/3 = 0.75, factor 2.2 / 1.9.
    // d3: length 4, norm 0.25 + 0.75 * 4/3 = 1.25, factor 2.2 / 2.5.
    const auto mixed = index.query("xml stream", 3);
    EXPECT_EQ(mixed[0].method_id, "d2");
    EXPECT_NEAR(mixed[0].score, 0.5914823012027262, 1e-9);
    EXPECT_EQ(mixed[1].method_id, "d3");
    EXPECT_NEAR(mixed[1].score, 0.44952654891407184, 1e-9);
    EXPECT_EQ(mixed[2].method_id, "d1");
    EXPECT_EQ(mixed[2].score, 0.0);
}

TEST(Bm25, MatchesReferenceImplementation) {
    const std::vector<Bm25Index::Document> docs{
        {"a", "parse array parse token value"},
        {"b", "read token stream close stream"},
        {"c", "array list add remove size"},
        {"d", "format date time zone offset"},
        {"e", "parse date format pattern"},
    };
    const Bm25Index index(docs);
    for (const std::string q : {"parse token", "stream close", "date zone offset", "array size remove", "parse parse"}) {
        const auto got = index.query(q, 5);
        const auto want = reference_bm25(docs, q);
        ASSERT_EQ(got.size(), want.size()) << q;
        for (std::size_t i = 0; i < got.size(); ++i) {
            EXPECT_EQ(got[i].method_id, want[i].first) << q;
            EXPECT_NEAR(got[i].score, want[i].second, 1e-12) << q;
        }
    }
}

TEST(Bm25, NonNegativeWhenTermsAreRare) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> word(0, 199), len(1, 12);
    std::vector<Bm25Index::Document> docs;
    for (int d = 0; d < 50; ++d) {
        std::string text;
        for (int i = len(rng); i > 0; --i) text += "w" + std::to_string(word(rng)) + " ";
        docs.emplace_back("doc" + std::to_string(d), text);
    }
    const Bm25Index index(docs);
    for (int t = 0; t < 200; ++t) {
        const std::string term = "w" + std::to_string(t);
        if (index.idf(term) < 0) continue;  // df > N/2
        for (const auto& r : index.query(term, 50)) EXPECT_GE(r.score, 0.0);
    }
}

TEST(Bm25, ParameterValidation) {
    EXPECT_EQ(code_of([] { Bm25Index({}); }), ErrorCode::EmptyIndex);
    EXPECT_EQ(code_of([] { Bm25Index(kThreeDocs, {1.2, 1.5}); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { Bm25Index(kThreeDocs, {-1.0, 0.5}); }), ErrorCode::InvalidArgument);
}

TEST(RetrievalDump, OneRecordPerLine) {
    const std::vector<RetrievalResult> results{{"a#f()", 0.5, 1}, {"b#g()", 0.25, 2}};
    const auto dump = retrieval_dump("Bug-1", results, "dense");
    std::istringstream in(dump);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, R"j({"bug_id":"Bug-1","method_id":"a#f()","score":0.5,"rank":1,"retriever":"dense"})j");
    std::getline(in, line);
    EXPECT_EQ(nlohmann::json::parse(line).at("rank"), 2);
    EXPECT_FALSE(std::getline(in, line));
}
