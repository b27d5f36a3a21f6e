// SPDX-License-Identifier: Apache-2.0
#include "funcloc/rerank.hpp"

#include "funcloc/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <limits>
#include <optional>

namespace funcloc::rerank {

using nlohmann::json;

namespace {

constexpr std::string_view kRerankInstructions =
    "You are given several suspicious methods retrieved via embedding-based search.\n"
    "Your task is to carefully read each code snippet and determine how likely each method causes the bug "
    "described earlier.\n"
    "Then, **rank the methods** from most likely buggy (rank 1) to least likely buggy, output is in json form.\n"
    "\n"
    "Use this JSON output schema:\n"
    "\n"
    "method = {'class': str, 'method':str, 'rank': int}\n"
    "\n"
    "return list[method]\n"
    "\n";

std::string_view simple_name(std::string_view fqn) {
    const auto dot = fqn.rfind('.');
    return dot == std::string_view::npos ? fqn : fqn.substr(dot + 1);
}

bool names_class(std::string_view name, const RerankCandidate& c) {
    return name == c.class_fqn || name == simple_name(c.class_fqn);
}

// End (exclusive) of the bracket-balanced span opening at `open`, skipping
// over quoted strings of either kind.
std::optional<std::size_t> balanced_end(std::string_view text, std::size_t open) {
    int depth = 0;
    char quote = 0;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (quote) {
            if (c == '\\') {
                ++i;
            } else if (c == quote) {
                quote = 0;
            }
            continue;
        }
        if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '[') {
            ++depth;
        } else if (c == ']' && --depth == 0) {
            return i + 1;
        }
    }
    return std::nullopt;
}

// Rewrites single-quoted strings as JSON strings.
std::string single_to_double_quotes(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    char quote = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (!quote) {
            if (c == '\'') {
                quote = c;
                out += '"';
                continue;
            }
            if (c == '"') quote = c;
            out += c;
            continue;
        }
        if (c == '\\' && i + 1 < s.size()) {
            if (quote == '\'' && s[i + 1] == '\'') {
                out += '\'';
            } else {
                out += c;
                out += s[i + 1];
            }
            ++i;
            continue;
        }
        if (c == quote) {
            quote = 0;
            out += '"';
            continue;
        }
        if (quote == '\'' && c == '"') {
            out += "\\\"";
            continue;
        }
        out += c;
    }
    return out;
}

std::optional<json> parse_array(std::string_view span) {
    auto doc = json::parse(span, nullptr, false);
    if (doc.is_discarded()) doc = json::parse(single_to_double_quotes(span), nullptr, false);
    if (doc.is_discarded() || !doc.is_array()) return std::nullopt;
    return doc;
}

LlmRankEntry to_entry(const json& item, std::size_t index) {
    const std::string where = "entry " + std::to_string(index) + ": ";
    if (!item.is_object()) throw Error(ErrorCode::SchemaViolation, where + "not an object");
    for (const char* key : {"class", "method", "rank"}) {
        if (!item.contains(key)) throw Error(ErrorCode::SchemaViolation, where + "missing \"" + key + "\"");
    }
    const auto& cls = item.at("class");
    const auto& method = item.at("method");
    const auto& rank = item.at("rank");
    if (!cls.is_string() || !method.is_string()) {
        throw Error(ErrorCode::SchemaViolation, where + "\"class\" and \"method\" must be strings");
    }
    if (!rank.is_number_integer()) throw Error(ErrorCode::SchemaViolation, where + "\"rank\" must be an integer");
    const bool positive = rank.is_number_unsigned() ? rank.get<std::uint64_t>() >= 1 : rank.get<std::int64_t>() >= 1;
    if (!positive) throw Error(ErrorCode::SchemaViolation, where + "\"rank\" must be at least 1");
    if (rank.is_number_unsigned() && rank.get<std::uint64_t>() > std::numeric_limits<std::int64_t>::max()) {
        throw Error(ErrorCode::SchemaViolation, where + "\"rank\" out of range");
    }
    return {cls.get<std::string>(), method.get<std::string>(), rank.get<std::int64_t>()};
}

}  // namespace

std::string_view to_string(Provenance p) noexcept {
    return p == Provenance::Llm ? "llm" : "fallback-retrieval";
}

std::vector<std::string> FinalRanking::method_ids() const {
    std::vector<std::string> ids;
    ids.reserve(entries.size());
    for (const auto& e : entries) ids.push_back(e.method_id);
    return ids;
}

std::vector<RerankCandidate> candidates_from(const std::vector<retrieval::RetrievalResult>& results,
                                             const corpus::MethodCorpus& corpus) {
    std::vector<RerankCandidate> out;
    out.reserve(results.size());
    for (const auto& r : results) {
        const auto* m = corpus.find(r.method_id);
        if (!m) throw Error(ErrorCode::InvalidArgument, "retrieved method '" + r.method_id + "' is not in the corpus");
        out.push_back({m->method_id, m->class_fqn, m->method_name, m->source_text});
    }
    return out;
}

std::string build_rerank_prompt(std::string_view query, const std::vector<RerankCandidate>& candidates) {
    if (candidates.empty()) throw Error(ErrorCode::InvalidArgument, "rerank prompt needs at least one candidate");
    std::string prompt;
    if (!query.empty()) {
        prompt += query;
        prompt += "\n\n";
    }
    prompt += kRerankInstructions;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        if (i) prompt += "\n\n";
        prompt += "class: " + c.class_fqn + "\n\nmethod: " + c.method_name + "\n\ncode snippet: " + c.source_text;
    }
    return prompt;
}

std::vector<LlmRankEntry> parse_rerank_response(std::string_view text) {
    for (auto open = text.find('['); open != std::string_view::npos; open = text.find('[', open + 1)) {
        const auto end = balanced_end(text, open);
        if (!end) continue;
        const auto doc = parse_array(text.substr(open, *end - open));
        if (!doc) continue;
        std::vector<LlmRankEntry> entries;
        entries.reserve(doc->size());
        for (std::size_t i = 0; i < doc->size(); ++i) entries.push_back(to_entry((*doc)[i], i));
        return entries;
    }
    throw Error(ErrorCode::NoJsonFound, "no JSON array in the rerank response");
}

FinalRanking reconcile(const std::vector<LlmRankEntry>& entries, const std::vector<RerankCandidate>& candidates,
                       std::size_t final_list_size) {
    if (candidates.empty()) throw Error(ErrorCode::InvalidArgument, "nothing to reconcile against");
    constexpr auto kUnranked = std::numeric_limits<std::int64_t>::max();
    std::vector<std::int64_t> best(candidates.size(), kUnranked);
    std::vector<bool> ambiguous(candidates.size(), false);

    for (const auto& e : entries) {
        const bool class_known = std::any_of(candidates.begin(), candidates.end(),
                                             [&](const RerankCandidate& c) { return names_class(e.class_name, c); });
        std::vector<std::size_t> hits;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const auto& c = candidates[i];
            if (c.method_name == e.method && (!class_known || names_class(e.class_name, c))) hits.push_back(i);
        }
        for (std::size_t i : hits) {
            best[i] = std::min(best[i], e.rank);
            if (hits.size() > 1) ambiguous[i] = true;
        }
    }

    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // Unranked candidates carry the largest rank, so a stable sort leaves
    // them last and in retrieval order.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return best[a] < best[b]; });

    FinalRanking out;
    for (std::size_t i : order) {
        if (out.entries.size() == final_list_size) break;
        const auto& c = candidates[i];
        const auto provenance = best[i] == kUnranked ? Provenance::FallbackRetrieval : Provenance::Llm;
        out.entries.push_back({c.method_id, c.class_fqn, c.method_name, provenance, ambiguous[i]});
    }
    return out;
}

FinalRanking retrieval_order(const std::vector<RerankCandidate>& candidates, std::size_t final_list_size) {
    FinalRanking out;
    for (const auto& c : candidates) {
        if (out.entries.size() == final_list_size) break;
        out.entries.push_back({c.method_id, c.class_fqn, c.method_name, Provenance::FallbackRetrieval, false});
    }
    return out;
}

FinalRanking rerank(std::string_view query, const std::vector<RerankCandidate>& candidates,
                    providers::ChatProvider& chat, const RerankOptions& options, std::string bug_id) {
    if (options.final_list_size == 0) throw Error(ErrorCode::InvalidArgument, "final list size must be at least 1");
    providers::ChatRequest request;
    request.model_id = options.model_id;
    request.prompt = build_rerank_prompt(query, candidates);
    request.temperature = options.temperature;
    request.max_output_tokens = options.max_output_tokens;

    providers::Usage usage;
    int calls = 0;
    int failures = 0;
    for (int attempt = 0; attempt <= options.parse_retries; ++attempt) {
        const auto response = chat.chat(request);
        usage += providers::usage_of(response);
        ++calls;
        try {
            auto ranking = reconcile(parse_rerank_response(response.text), candidates, options.final_list_size);
            ranking.bug_id = std::move(bug_id);
            ranking.usage = usage;
            ranking.chat_calls = calls;
            ranking.parse_failures = failures;
            return ranking;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoJsonFound && e.code() != ErrorCode::SchemaViolation) throw;
            ++failures;
        }
    }
    auto ranking = retrieval_order(candidates, options.final_list_size);
    ranking.bug_id = std::move(bug_id);
    ranking.usage = usage;
    ranking.chat_calls = calls;
    ranking.parse_failures = failures;
    return ranking;
}

std::string final_ranking_jsonl(const FinalRanking& ranking) {
    std::string out;
    for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
        const auto& e = ranking.entries[i];
        nlohmann::ordered_json line;
        line["bug_id"] = ranking.bug_id;
        line["rank"] = i + 1;
        line["class"] = e.class_fqn;
        line["method"] = e.method_name;
        line["method_id"] = e.method_id;
        line["provenance"] = to_string(e.provenance);
        if (e.ambiguous) line["ambiguous"] = true;
        out += line.dump() + "\n";
    }
    return out;
}

}  // namespace funcloc::rerank
