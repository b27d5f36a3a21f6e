// SPDX-License-Identifier: Apache-2.0
#include "funcloc/metrics.hpp"

#include "funcloc/error.hpp"

#include <json.hpp>

#include <algorithm>

namespace funcloc::eval {

bool key_matches(const corpus::MethodKey& ground_truth, const corpus::MethodKey& ranked) {
    if (ground_truth.class_fqn != ranked.class_fqn || ground_truth.method_name != ranked.method_name) return false;
    if (!ground_truth.param_types || !ranked.param_types) return true;
    return *ground_truth.param_types == *ranked.param_types;
}

std::optional<std::size_t> first_relevant_rank(const std::vector<corpus::MethodKey>& ranking,
                                               const std::vector<corpus::MethodKey>& relevant) {
    for (std::size_t r = 0; r < ranking.size(); ++r) {
        for (const auto& gt : relevant) {
            if (key_matches(gt, ranking[r])) return r + 1;
        }
    }
    return std::nullopt;
}

double average_precision(const std::vector<corpus::MethodKey>& ranking, const std::vector<corpus::MethodKey>& relevant) {
    if (relevant.empty()) throw Error(ErrorCode::EmptyRelevantSet, "average precision needs ground truth");
    std::vector<bool> credited(relevant.size(), false);
    std::size_t found = 0;
    double sum = 0.0;
    for (std::size_t r = 0; r < ranking.size(); ++r) {
        for (std::size_t j = 0; j < relevant.size(); ++j) {
            if (credited[j] || !key_matches(relevant[j], ranking[r])) continue;
            credited[j] = true;
            ++found;
            sum += static_cast<double>(found) / static_cast<double>(r + 1);
            break;
        }
    }
    return sum / static_cast<double>(relevant.size());
}

double reciprocal_rank(const std::vector<corpus::MethodKey>& ranking, const std::vector<corpus::MethodKey>& relevant) {
    const auto r = first_relevant_rank(ranking, relevant);
    return r ? 1.0 / static_cast<double>(*r) : 0.0;
}

double cost_usd(const providers::Usage& usage, const Prices& prices) {
    return static_cast<double>(usage.input_tokens) * prices.input_per_million / 1e6 +
           static_cast<double>(usage.output_tokens) * prices.output_per_million / 1e6;
}

EvalSummary summarize(std::vector<BugOutcome> outcomes, const Prices& prices) {
    if (outcomes.empty()) throw Error(ErrorCode::EmptyBugset, "no bugs to summarize");
    std::sort(outcomes.begin(), outcomes.end(),
              [](const BugOutcome& a, const BugOutcome& b) { return a.bug_id < b.bug_id; });
    EvalSummary s;
    for (int n : kTopN) s.top_n[n] = 0;
    double ap_sum = 0.0;
    double rr_sum = 0.0;
    for (const auto& o : outcomes) {
        s.usage += o.usage;
        if (!o.ok) {
            ++s.n_failed;
            continue;
        }
        ++s.n_bugs;
        const auto first = first_relevant_rank(o.ranking, o.ground_truth);
        for (int n : kTopN) {
            if (first && *first <= static_cast<std::size_t>(n)) ++s.top_n[n];
        }
        ap_sum += average_precision(o.ranking, o.ground_truth);
        rr_sum += first ? 1.0 / static_cast<double>(*first) : 0.0;
    }
    if (s.n_bugs) {
        s.map_score = ap_sum / static_cast<double>(s.n_bugs);
        s.mrr = rr_sum / static_cast<double>(s.n_bugs);
    }
    s.cost_usd = cost_usd(s.usage, prices);
    return s;
}

std::string summary_json(const EvalSummary& summary) {
    nlohmann::ordered_json j;
    j["n_bugs"] = summary.n_bugs;
    j["n_failed"] = summary.n_failed;
    for (int n : kTopN) j["top_" + std::to_string(n)] = summary.top_n.at(n);
    j["map"] = summary.map_score;
    j["mrr"] = summary.mrr;
    j["input_tokens"] = summary.usage.input_tokens;
    j["output_tokens"] = summary.usage.output_tokens;
    j["cost_usd"] = summary.cost_usd;
    return j.dump(2) + "\n";
}

}  // namespace funcloc::eval
