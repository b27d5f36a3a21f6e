// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "funcloc/corpus.hpp"
#include "funcloc/providers.hpp"
#include "funcloc/retrieval.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace funcloc::rerank {

struct RerankCandidate {
    std::string method_id;
    std::string class_fqn;
    std::string method_name;
    std::string source_text;
};

/// Candidates for `results`, in retrieval order. Throws InvalidArgument for
/// an id missing from the corpus.
std::vector<RerankCandidate> candidates_from(const std::vector<retrieval::RetrievalResult>& results,
                                             const corpus::MethodCorpus& corpus);

struct LlmRankEntry {
    std::string class_name;
    std::string method;
    std::int64_t rank = 0;

    friend bool operator==(const LlmRankEntry&, const LlmRankEntry&) = default;
};

enum class Provenance { Llm, FallbackRetrieval };

std::string_view to_string(Provenance p) noexcept;

struct RankedMethod {
    std::string method_id;
    std::string class_fqn;
    std::string method_name;
    Provenance provenance = Provenance::FallbackRetrieval;
    // An LLM entry named several overloads; each got the entry's rank.
    bool ambiguous = false;
};

struct FinalRanking {
    std::string bug_id;
    std::vector<RankedMethod> entries;
    providers::Usage usage;
    int chat_calls = 0;
    int parse_failures = 0;

    std::vector<std::string> method_ids() const;
};

/// Functionality query (omitted when empty), then the instructions, then one
/// class/method/code block per candidate. Throws InvalidArgument when there
/// are no candidates.
std::string build_rerank_prompt(std::string_view query, const std::vector<RerankCandidate>& candidates);

/// First JSON array in `text` (prose and code fences around it are fine;
/// single-quoted strings are accepted). Throws NoJsonFound or SchemaViolation.
std::vector<LlmRankEntry> parse_rerank_response(std::string_view text);

/// Matches entries to candidates by class (fully qualified or simple name)
/// and method name, by method name alone when the class names no candidate.
/// Unmatched entries are dropped. Matched candidates sort by best rank then
/// retrieval order; the rest follow in retrieval order.
FinalRanking reconcile(const std::vector<LlmRankEntry>& entries, const std::vector<RerankCandidate>& candidates,
                       std::size_t final_list_size);

/// Retrieval order with fallback provenance, truncated.
FinalRanking retrieval_order(const std::vector<RerankCandidate>& candidates, std::size_t final_list_size);

struct RerankOptions {
    std::size_t final_list_size = 10;
    int parse_retries = 1;
    std::string model_id;
    double temperature = 0.0;
    int max_output_tokens = 2048;
};

/// Prompt, chat, parse, reconcile. Unparseable replies are retried, then the
/// retrieval order is returned. Provider errors propagate.
FinalRanking rerank(std::string_view query, const std::vector<RerankCandidate>& candidates,
                    providers::ChatProvider& chat, const RerankOptions& options, std::string bug_id = {});

/// One JSON object per line: bug_id, rank, class, method, method_id,
/// provenance (plus "ambiguous": true where it applies).
std::string final_ranking_jsonl(const FinalRanking& ranking);

}  // namespace funcloc::rerank
