// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "funcloc/corpus.hpp"
#include "funcloc/providers.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace funcloc::eval {

/// Same class and name; parameter types are compared only when both sides
/// have them.
bool key_matches(const corpus::MethodKey& ground_truth, const corpus::MethodKey& ranked);

/// 1-based rank of the first entry matching any relevant key.
std::optional<std::size_t> first_relevant_rank(const std::vector<corpus::MethodKey>& ranking,
                                               const std::vector<corpus::MethodKey>& relevant);

/// Mean of precision@r over ranks r that hit a not yet credited relevant
/// key, divided by the number of relevant keys. Throws EmptyRelevantSet.
double average_precision(const std::vector<corpus::MethodKey>& ranking, const std::vector<corpus::MethodKey>& relevant);

/// 1/r for the first relevant rank, 0 when nothing relevant is ranked.
double reciprocal_rank(const std::vector<corpus::MethodKey>& ranking, const std::vector<corpus::MethodKey>& relevant);

struct Prices {
    double input_per_million = 0.15;
    double output_per_million = 0.60;

    friend bool operator==(const Prices&, const Prices&) = default;
};

double cost_usd(const providers::Usage& usage, const Prices& prices);

inline constexpr int kTopN[] = {1, 3, 5};

/// One evaluated bug. A failed bug keeps its error and any usage spent.
struct BugOutcome {
    std::string bug_id;
    bool ok = false;
    std::string error;
    std::vector<corpus::MethodKey> ranking;
    std::vector<corpus::MethodKey> ground_truth;
    providers::Usage usage;
};

struct EvalSummary {
    std::size_t n_bugs = 0;    // successfully localized
    std::size_t n_failed = 0;  // excluded from the metrics
    std::map<int, std::size_t> top_n;
    double map_score = 0.0;
    double mrr = 0.0;
    providers::Usage usage;
    double cost_usd = 0.0;

    friend bool operator==(const EvalSummary&, const EvalSummary&) = default;
};

/// Aggregates in bug_id order, so the result does not depend on the order
/// of `outcomes`. Throws EmptyBugset when `outcomes` is empty.
EvalSummary summarize(std::vector<BugOutcome> outcomes, const Prices& prices);

/// Fixed field order: n_bugs, n_failed, top_1, top_3, top_5, map, mrr,
/// input_tokens, output_tokens, cost_usd.
std::string summary_json(const EvalSummary& summary);

}  // namespace funcloc::eval
