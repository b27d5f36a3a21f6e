// SPDX-License-Identifier: Apache-2.0
#include "funcloc/eval.hpp"

#include "funcloc/error.hpp"
#include "funcloc/util.hpp"

#include <algorithm>
#include <set>

namespace funcloc::eval {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::pair<Variant, std::string_view> kVariantNames[] = {
    {Variant::Full, "full"},         {Variant::NoQuery, "no_query"},
    {Variant::Bm25, "bm25"},         {Variant::NoRerank, "no_rerank"},
    {Variant::NoStackTrace, "no_stack_trace"},
};

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

corpus::MethodKey key_of(const corpus::MethodRecord& m) {
    return {m.class_fqn, m.method_name, m.param_types};
}

std::string artifact_dir_name(std::string bug_id) {
    std::replace_if(bug_id.begin(), bug_id.end(), [](char c) { return c == '/' || c == '\\'; }, '_');
    return bug_id;
}

ordered_json usage_json(const providers::Usage& u) {
    ordered_json j;
    j["input_tokens"] = u.input_tokens;
    j["output_tokens"] = u.output_tokens;
    return j;
}

}  // namespace

std::string_view to_string(Variant v) noexcept {
    for (const auto& [variant, name] : kVariantNames) {
        if (variant == v) return name;
    }
    return "full";
}

Variant variant_from_string(std::string_view name) {
    for (const auto& [variant, n] : kVariantNames) {
        if (n == name) return variant;
    }
    throw Error(ErrorCode::InvalidConfig, "unknown variant '" + std::string(name) +
                                              "' (expected full, no_query, bm25, no_rerank or no_stack_trace)");
}

void PipelineConfig::validate() const {
    if (final_list_size < 1) throw Error(ErrorCode::InvalidConfig, "final_list_size must be at least 1");
    if (retrieval_k < final_list_size) {
        throw Error(ErrorCode::InvalidConfig, "retrieval_k (" + std::to_string(retrieval_k) +
                                                  ") must be at least final_list_size (" +
                                                  std::to_string(final_list_size) + ")");
    }
    if (prices.input_per_million < 0 || prices.output_per_million < 0) {
        throw Error(ErrorCode::InvalidConfig, "prices must be non-negative");
    }
    if (max_stack_lines < 1) throw Error(ErrorCode::InvalidConfig, "max_stack_lines must be at least 1");
    if (rerank_retries < 0) throw Error(ErrorCode::InvalidConfig, "rerank_retries must be non-negative");
    if (temperature < 0) throw Error(ErrorCode::InvalidConfig, "temperature must be non-negative");
    if (max_output_tokens < 1) throw Error(ErrorCode::InvalidConfig, "max_output_tokens must be at least 1");
    if (bm25.k1 < 0 || bm25.b < 0 || bm25.b > 1) throw Error(ErrorCode::InvalidConfig, "BM25 needs k1 >= 0, 0 <= b <= 1");
}

ordered_json to_json(const PipelineConfig& c) {
    ordered_json j;
    j["retrieval_k"] = c.retrieval_k;
    j["final_list_size"] = c.final_list_size;
    j["variant"] = to_string(c.variant);
    j["chat_model"] = c.chat_model;
    j["price_input_per_million"] = c.prices.input_per_million;
    j["price_output_per_million"] = c.prices.output_per_million;
    j["max_stack_lines"] = c.max_stack_lines;
    j["bm25_k1"] = c.bm25.k1;
    j["bm25_b"] = c.bm25.b;
    j["rerank_retries"] = c.rerank_retries;
    j["temperature"] = c.temperature;
    j["max_output_tokens"] = c.max_output_tokens;
    return j;
}

PipelineConfig pipeline_config_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "pipeline config must be an object");
    PipelineConfig c;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "retrieval_k") c.retrieval_k = value.get<std::size_t>();
            else if (key == "final_list_size") c.final_list_size = value.get<std::size_t>();
            else if (key == "variant") c.variant = variant_from_string(value.get<std::string>());
            else if (key == "chat_model") c.chat_model = value.get<std::string>();
            else if (key == "price_input_per_million") c.prices.input_per_million = value.get<double>();
            else if (key == "price_output_per_million") c.prices.output_per_million = value.get<double>();
            else if (key == "max_stack_lines") c.max_stack_lines = value.get<std::size_t>();
            else if (key == "bm25_k1") c.bm25.k1 = value.get<double>();
            else if (key == "bm25_b") c.bm25.b = value.get<double>();
            else if (key == "rerank_retries") c.rerank_retries = value.get<int>();
            else if (key == "temperature") c.temperature = value.get<double>();
            else if (key == "max_output_tokens") c.max_output_tokens = value.get<int>();
            else throw Error(ErrorCode::InvalidConfig, "unknown pipeline setting '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("pipeline config: ") + e.what());
    }
    c.validate();
    return c;
}

BugCase load_bug_case(const fs::path& dir) {
    const auto manifest_path = dir / "bug.json";
    BugCase bug;
    bug.dir = dir;
    json doc;
    try {
        doc = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, manifest_path.string() + ": " + e.what());
    }
    try {
        bug.bug_id = doc.at("bug_id").get<std::string>();
        const auto tests_path = resolve(dir, doc.at("failing_tests").get<std::string>());
        const auto tests = query::parse_failing_tests(read_file(tests_path));
        bug.failing_tests = tests.tests;

        const auto& cov = doc.at("coverage");
        const auto cov_path = resolve(dir, cov.at("path").get<std::string>());
        const auto format = corpus::coverage_format_from_string(cov.value("format", std::string("simple-json")));
        std::vector<std::string> test_names;
        for (const auto& t : bug.failing_tests) test_names.push_back(t.test_fqn);
        bug.coverage = corpus::parse_coverage(read_file(cov_path), format, bug.bug_id, test_names);

        for (const auto& root : doc.at("source_roots")) bug.source_roots.push_back(resolve(dir, root.get<std::string>()));
        for (const auto& gt : doc.at("ground_truth")) {
            corpus::MethodKey key{gt.at("class").get<std::string>(), gt.at("method").get<std::string>(), std::nullopt};
            if (gt.contains("params") && !gt.at("params").is_null()) {
                std::vector<std::string> params;
                for (const auto& p : gt.at("params")) params.push_back(corpus::normalize_type_name(p.get<std::string>()));
                key.param_types = std::move(params);
            }
            bug.ground_truth.push_back(std::move(key));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, manifest_path.string() + ": " + e.what());
    }
    if (bug.ground_truth.empty()) {
        throw Error(ErrorCode::EmptyRelevantSet, manifest_path.string() + ": ground_truth is empty");
    }
    return bug;
}

std::vector<BugCase> load_bugset(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, "bugset directory '" + dir.string() + "' does not exist");
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_directory() && fs::exists(entry.path() / "bug.json")) dirs.push_back(entry.path());
    }
    if (dirs.empty()) throw Error(ErrorCode::EmptyBugset, "no bug.json under '" + dir.string() + "'");
    std::sort(dirs.begin(), dirs.end());
    std::vector<BugCase> bugs;
    std::set<std::string> ids;
    for (const auto& d : dirs) {
        bugs.push_back(load_bug_case(d));
        if (!ids.insert(bugs.back().bug_id).second) {
            throw Error(ErrorCode::InvalidConfig, "bug id '" + bugs.back().bug_id + "' appears twice in the bugset");
        }
    }
    return bugs;
}

PreparedBug prepare(const BugCase& bug, const PipelineConfig& config, Providers providers) {
    config.validate();
    PreparedBug p;
    p.bug = bug;
    p.bundle = query::assemble_bundle(bug.failing_tests, bug.bug_id);
    p.corpus = corpus::build_corpus(bug.coverage, bug.source_roots);
    if (p.corpus.corpus.methods.empty()) {
        throw Error(ErrorCode::EmptyIndex, "no covered method of " + bug.bug_id + " was found in the source roots");
    }

    if (config.variant == Variant::NoQuery) {
        auto bundle = p.bundle;
        for (auto& t : bundle.tests) t.stack_trace = query::truncate_lines(t.stack_trace, config.max_stack_lines);
        p.query_text = query::raw_failure_text(bundle);
    } else {
        query::ExtractionOptions options;
        options.include_stack_trace = config.variant != Variant::NoStackTrace;
        options.max_stack_lines = config.max_stack_lines;
        options.model_id = config.chat_model;
        options.temperature = config.temperature;
        options.max_output_tokens = config.max_output_tokens;
        auto q = query::extract_functionality(p.bundle, providers.chat, options);
        p.query_text = std::move(q.text);
        p.query_usage = q.usage;
    }

    if (config.variant != Variant::Bm25) {
        p.method_vectors = embedding::embed_corpus(p.corpus.corpus, providers.embedding);
        p.query_vector = embedding::embed_text(p.query_text, providers.embedding);
    }
    return p;
}

BugRun finish(const PreparedBug& p, const PipelineConfig& config, providers::ChatProvider& chat) {
    config.validate();
    const auto& methods = p.corpus.corpus.methods;
    BugRun run;
    run.bug_id = p.bug.bug_id;
    run.query_text = p.query_text;
    run.corpus_size = methods.size();
    run.unresolved_coverage = p.corpus.unresolved;
    for (const auto& gt : p.bug.ground_truth) {
        const bool found = std::any_of(methods.begin(), methods.end(),
                                       [&](const corpus::MethodRecord& m) { return key_matches(gt, key_of(m)); });
        if (!found) run.unresolved_ground_truth.push_back(gt);
    }

    if (config.variant == Variant::Bm25) {
        std::vector<retrieval::Bm25Index::Document> docs;
        docs.reserve(methods.size());
        for (const auto& m : methods) docs.emplace_back(m.method_id, m.source_text);
        run.retrieved = retrieval::Bm25Index(docs, config.bm25).query(p.query_text, config.retrieval_k);
        run.retriever = "bm25";
    } else {
        if (!p.query_vector || p.method_vectors.size() != methods.size()) {
            throw Error(ErrorCode::InvalidArgument, "bug " + p.bug.bug_id + " was prepared without embeddings");
        }
        std::vector<retrieval::DenseIndex::Entry> entries;
        entries.reserve(methods.size());
        for (std::size_t i = 0; i < methods.size(); ++i) entries.emplace_back(methods[i].method_id, p.method_vectors[i]);
        run.retrieved = retrieval::DenseIndex(std::move(entries), p.bug.bug_id).query(*p.query_vector, config.retrieval_k);
        run.retriever = "dense";
    }

    const auto candidates = rerank::candidates_from(run.retrieved, p.corpus.corpus);
    if (config.variant == Variant::NoRerank) {
        run.ranking = rerank::retrieval_order(candidates, config.final_list_size);
    } else {
        rerank::RerankOptions options;
        options.final_list_size = config.final_list_size;
        options.parse_retries = config.rerank_retries;
        options.model_id = config.chat_model;
        options.temperature = config.temperature;
        options.max_output_tokens = config.max_output_tokens;
        run.ranking = rerank::rerank(p.query_text, candidates, chat, options, p.bug.bug_id);
    }
    run.ranking.bug_id = p.bug.bug_id;
    for (const auto& e : run.ranking.entries) run.ranking_keys.push_back(key_of(*p.corpus.corpus.find(e.method_id)));
    run.usage = p.query_usage + run.ranking.usage;
    return run;
}

BugRun localize(const BugCase& bug, const PipelineConfig& config, Providers providers) {
    return finish(prepare(bug, config, providers), config, providers.chat);
}

namespace {

BugOutcome failed_outcome(const BugCase& bug, std::string error) {
    BugOutcome o;
    o.bug_id = bug.bug_id;
    o.ok = false;
    o.error = std::move(error);
    o.ground_truth = bug.ground_truth;
    return o;
}

BugOutcome ok_outcome(const BugCase& bug, const BugRun& run) {
    BugOutcome o;
    o.bug_id = bug.bug_id;
    o.ok = true;
    o.ranking = run.ranking_keys;
    o.ground_truth = bug.ground_truth;
    o.usage = run.usage;
    return o;
}

}  // namespace

BatchResult evaluate(const std::vector<BugCase>& bugs, const PipelineConfig& config, Providers providers,
                     std::size_t workers) {
    config.validate();
    if (bugs.empty()) throw Error(ErrorCode::EmptyBugset, "no bugs to evaluate");
    BatchResult result;
    result.runs.resize(bugs.size());
    result.outcomes.resize(bugs.size());
    parallel_for(bugs.size(), workers, [&](std::size_t i) {
        try {
            result.runs[i] = localize(bugs[i], config, providers);
            result.outcomes[i] = ok_outcome(bugs[i], *result.runs[i]);
        } catch (const std::exception& e) {
            result.outcomes[i] = failed_outcome(bugs[i], e.what());
        }
    });
    result.summary = summarize(result.outcomes, config.prices);
    return result;
}

void write_run_directory(const fs::path& out_dir, const std::vector<BugCase>& bugs, const BatchResult& result,
                         const ordered_json& config_echo, const ordered_json& extra) {
    ordered_json manifest;
    manifest["config"] = config_echo;
    ordered_json entries = ordered_json::array();

    std::vector<std::size_t> order(bugs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return bugs[a].bug_id < bugs[b].bug_id; });

    for (std::size_t i : order) {
        const auto& outcome = result.outcomes[i];
        ordered_json entry;
        entry["bug_id"] = bugs[i].bug_id;
        entry["status"] = outcome.ok ? "ok" : "failed";
        if (!outcome.ok) {
            entry["error"] = outcome.error;
            entries.push_back(std::move(entry));
            continue;
        }
        const auto& run = *result.runs[i];
        const fs::path rel = fs::path("bugs") / artifact_dir_name(run.bug_id);
        write_file(out_dir / rel / "query.txt", run.query_text);
        write_file(out_dir / rel / "retrieval.jsonl", retrieval::retrieval_dump(run.bug_id, run.retrieved, run.retriever));
        write_file(out_dir / rel / "ranking.jsonl", rerank::final_ranking_jsonl(run.ranking));
        ordered_json usage = usage_json(run.usage);
        usage["chat_calls_rerank"] = run.ranking.chat_calls;
        usage["rerank_parse_failures"] = run.ranking.parse_failures;
        write_file(out_dir / rel / "usage.json", usage.dump(2) + "\n");

        entry["corpus_size"] = run.corpus_size;
        ordered_json unresolved = ordered_json::array();
        for (const auto& u : run.unresolved_coverage) unresolved.push_back(u.key.to_string());
        entry["unresolved_coverage"] = std::move(unresolved);
        ordered_json unresolved_gt = ordered_json::array();
        for (const auto& k : run.unresolved_ground_truth) unresolved_gt.push_back(k.to_string());
        entry["unresolved_ground_truth"] = std::move(unresolved_gt);
        entry["usage"] = usage_json(run.usage);
        entry["artifacts"] = {{"query", (rel / "query.txt").generic_string()},
                              {"retrieval", (rel / "retrieval.jsonl").generic_string()},
                              {"ranking", (rel / "ranking.jsonl").generic_string()},
                              {"usage", (rel / "usage.json").generic_string()}};
        entries.push_back(std::move(entry));
    }
    manifest["bugs"] = std::move(entries);
    manifest["summary"] = "summary.json";
    for (const auto& [key, value] : extra.items()) manifest[key] = value;

    write_file(out_dir / "summary.json", summary_json(result.summary));
    write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

std::map<std::size_t, EvalSummary> sensitivity_sweep(const std::vector<BugCase>& bugs, const PipelineConfig& config,
                                                     Providers providers, const std::vector<std::size_t>& k_values,
                                                     std::size_t workers) {
    if (k_values.empty()) throw Error(ErrorCode::InvalidArgument, "sensitivity sweep needs at least one k");
    if (bugs.empty()) throw Error(ErrorCode::EmptyBugset, "no bugs to sweep");
    for (std::size_t k : k_values) {
        auto c = config;
        c.retrieval_k = k;
        c.validate();
    }

    std::vector<std::optional<PreparedBug>> prepared(bugs.size());
    std::vector<std::string> errors(bugs.size());
    parallel_for(bugs.size(), workers, [&](std::size_t i) {
        try {
            prepared[i] = prepare(bugs[i], config, providers);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    std::map<std::size_t, EvalSummary> out;
    for (std::size_t k : k_values) {
        auto c = config;
        c.retrieval_k = k;
        std::vector<BugOutcome> outcomes(bugs.size());
        parallel_for(bugs.size(), workers, [&](std::size_t i) {
            if (!prepared[i]) {
                outcomes[i] = failed_outcome(bugs[i], errors[i]);
                return;
            }
            try {
                outcomes[i] = ok_outcome(bugs[i], finish(*prepared[i], c, providers.chat));
            } catch (const std::exception& e) {
                outcomes[i] = failed_outcome(bugs[i], e.what());
            }
        });
        out[k] = summarize(std::move(outcomes), c.prices);
    }
    return out;
}

std::size_t top1_variation(const std::map<std::size_t, EvalSummary>& sweep) {
    if (sweep.empty()) return 0;
    std::size_t lo = sweep.begin()->second.top_n.at(1);
    std::size_t hi = lo;
    for (const auto& [k, s] : sweep) {
        lo = std::min(lo, s.top_n.at(1));
        hi = std::max(hi, s.top_n.at(1));
    }
    return hi - lo;
}

}  // namespace funcloc::eval
