// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "funcloc/corpus.hpp"
#include "funcloc/embedding.hpp"
#include "funcloc/metrics.hpp"
#include "funcloc/providers.hpp"
#include "funcloc/query.hpp"
#include "funcloc/rerank.hpp"
#include "funcloc/retrieval.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace funcloc::eval {

/// full: functionality query, dense retrieval, rerank.
/// no_query: the raw test code and traces are the retrieval text.
/// bm25: functionality query against a BM25 index, then rerank.
/// no_rerank: dense retrieval order, truncated.
/// no_stack_trace: full, with traces left out of the extraction prompt.
enum class Variant { Full, NoQuery, Bm25, NoRerank, NoStackTrace };

inline constexpr Variant kAllVariants[] = {Variant::Full, Variant::NoQuery, Variant::Bm25, Variant::NoRerank,
                                           Variant::NoStackTrace};

std::string_view to_string(Variant v) noexcept;
/// Throws InvalidConfig for an unknown name.
Variant variant_from_string(std::string_view name);

struct PipelineConfig {
    std::size_t retrieval_k = 40;
    std::size_t final_list_size = 10;
    Variant variant = Variant::Full;
    std::string chat_model = "mock-chat";
    Prices prices;
    std::size_t max_stack_lines = 50;
    retrieval::Bm25Params bm25;
    int rerank_retries = 1;
    double temperature = 0.0;
    int max_output_tokens = 2048;

    /// Throws InvalidConfig unless retrieval_k >= final_list_size >= 1.
    void validate() const;

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

nlohmann::ordered_json to_json(const PipelineConfig& config);
/// Missing fields keep their defaults; unknown fields throw InvalidConfig.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

struct BugCase {
    std::string bug_id;
    std::filesystem::path dir;
    std::vector<query::FailingTest> failing_tests;
    corpus::CoverageReport coverage;
    std::vector<std::filesystem::path> source_roots;
    std::vector<corpus::MethodKey> ground_truth;
};

/// Reads `dir/bug.json`:
///   {"bug_id", "failing_tests": path, "coverage": {"path", "format"},
///    "source_roots": [path], "ground_truth": [{"class", "method", "params"?}]}
/// Relative paths resolve against `dir`.
BugCase load_bug_case(const std::filesystem::path& dir);

/// Every immediate subdirectory holding a bug.json, in name order. Throws
/// EmptyBugset when there is none.
std::vector<BugCase> load_bugset(const std::filesystem::path& dir);

struct Providers {
    providers::ChatProvider& chat;
    providers::EmbeddingProvider& embedding;
};

/// Stages that do not depend on retrieval depth: bundle, corpus, retrieval
/// text and embeddings.
struct PreparedBug {
    BugCase bug;
    query::FailureBundle bundle;
    corpus::CorpusBuild corpus;
    std::string query_text;
    providers::Usage query_usage;
    std::vector<embedding::EmbeddingVector> method_vectors;
    std::optional<embedding::EmbeddingVector> query_vector;
};

struct BugRun {
    std::string bug_id;
    std::string query_text;
    std::string retriever;  // "dense" or "bm25"
    std::vector<retrieval::RetrievalResult> retrieved;
    rerank::FinalRanking ranking;
    std::vector<corpus::MethodKey> ranking_keys;
    providers::Usage usage;
    std::size_t corpus_size = 0;
    std::vector<corpus::UnresolvedKey> unresolved_coverage;
    std::vector<corpus::MethodKey> unresolved_ground_truth;
};

PreparedBug prepare(const BugCase& bug, const PipelineConfig& config, Providers providers);
BugRun finish(const PreparedBug& prepared, const PipelineConfig& config, providers::ChatProvider& chat);
BugRun localize(const BugCase& bug, const PipelineConfig& config, Providers providers);

struct BatchResult {
    std::vector<std::optional<BugRun>> runs;  // aligned with the input bugs
    std::vector<BugOutcome> outcomes;
    EvalSummary summary;
};

/// Bugs run on up to `workers` threads. A failing bug is recorded and the
/// rest continue.
BatchResult evaluate(const std::vector<BugCase>& bugs, const PipelineConfig& config, Providers providers,
                     std::size_t workers = 1);

/// Writes bugs/<bug_id>/{query.txt, retrieval.jsonl, ranking.jsonl,
/// usage.json}, summary.json and manifest.json. `extra` is merged into the
/// manifest (provider statistics and the like).
void write_run_directory(const std::filesystem::path& out_dir, const std::vector<BugCase>& bugs,
                         const BatchResult& result, const nlohmann::ordered_json& config_echo,
                         const nlohmann::ordered_json& extra = nlohmann::ordered_json::object());

/// Retrieval and reranking rerun per k over one shared preparation of each
/// bug, so the functionality query and embeddings are computed once.
std::map<std::size_t, EvalSummary> sensitivity_sweep(const std::vector<BugCase>& bugs, const PipelineConfig& config,
                                                     Providers providers, const std::vector<std::size_t>& k_values,
                                                     std::size_t workers = 1);

/// Largest minus smallest Top-1 over the sweep.
std::size_t top1_variation(const std::map<std::size_t, EvalSummary>& sweep);

}  // namespace funcloc::eval
