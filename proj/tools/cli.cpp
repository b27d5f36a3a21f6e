// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include "funcloc/caching_providers.hpp"
#include "funcloc/error.hpp"
#include "funcloc/eval.hpp"
#include "funcloc/http_providers.hpp"
#include "funcloc/mock_providers.hpp"
#include "funcloc/run_config.hpp"
#include "funcloc/util.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <optional>

namespace funcloc::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
    std::string config_path;
    std::optional<std::string> variant;
    std::optional<std::size_t> k;
    std::optional<std::size_t> final_size;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    std::string out_dir = "funcloc-out";
    bool mock = false;
};

void add_common(CLI::App& cmd, CommonFlags& f) {
    cmd.add_option("--config", f.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    cmd.add_option("--variant", f.variant, "full, no_query, bm25, no_rerank or no_stack_trace");
    cmd.add_option("--k", f.k, "number of methods retrieved for reranking");
    cmd.add_option("--final-size", f.final_size, "length of the final ranking");
    cmd.add_option("--seed", f.seed, "seed for mock providers (default 42)");
    cmd.add_option("--workers", f.workers, "bugs processed concurrently");
    cmd.add_option("--out-dir", f.out_dir, "directory for rankings, artifacts and caches");
    cmd.add_flag("--mock-providers", f.mock, "use deterministic offline providers");
}

RunConfig effective_config(const CommonFlags& f) {
    RunConfig c = f.config_path.empty() ? RunConfig{} : load_run_config(f.config_path);
    if (f.variant) c.pipeline.variant = eval::variant_from_string(*f.variant);
    if (f.k) c.pipeline.retrieval_k = *f.k;
    if (f.final_size) c.pipeline.final_list_size = *f.final_size;
    if (f.seed) c.seed = *f.seed;
    if (f.workers) c.workers = *f.workers;
    if (f.mock) c.mock_providers = true;
    if (c.chat_cache.empty()) c.chat_cache = (fs::path(f.out_dir) / "cache" / "chat.jsonl").string();
    if (c.embedding_cache.empty()) c.embedding_cache = (fs::path(f.out_dir) / "cache" / "embeddings.jsonl").string();
    c.validate();
    return c;
}

// Providers for one run: the raw clients wrapped in persistent caches.
struct ProviderSet {
    std::shared_ptr<providers::MockChatProvider> mock_chat;
    std::shared_ptr<providers::MockEmbeddingProvider> mock_embedding;
    std::shared_ptr<providers::CachingChatProvider> chat;
    std::shared_ptr<providers::CachingEmbeddingProvider> embedding;

    eval::Providers view() { return {*chat, *embedding}; }

    ordered_json stats() const {
        ordered_json j;
        j["chat"] = {{"cache_hits", chat->hits()}, {"provider_calls", chat->misses()}};
        j["embedding"] = {{"cache_hits", embedding->hits()}, {"texts_sent_to_provider", embedding->misses()}};
        return j;
    }
};

void add_mock_rules(providers::MockChatProvider& chat, const fs::path& dir) {
    const auto path = dir / "mock_chat.json";
    if (fs::exists(path)) chat.add_rules(providers::parse_mock_rules(read_file(path)));
}

ProviderSet make_providers(const RunConfig& c, const std::vector<eval::BugCase>& bugs) {
    ProviderSet set;
    std::shared_ptr<providers::ChatProvider> chat;
    std::shared_ptr<providers::EmbeddingProvider> embedding;
    if (c.mock_providers) {
        set.mock_chat = std::make_shared<providers::MockChatProvider>("no scripted reply");
        for (const auto& bug : bugs) add_mock_rules(*set.mock_chat, bug.dir);
        set.mock_embedding = std::make_shared<providers::MockEmbeddingProvider>(c.seed);
        chat = set.mock_chat;
        embedding = set.mock_embedding;
    } else {
        providers::HttpSettings chat_settings{c.chat.base_url, std::chrono::seconds(c.chat.timeout_s),
                                              c.chat.max_in_flight, {}};
        chat_settings.retry.max_retries = c.chat.max_retries;
        chat = std::make_shared<providers::HttpChatProvider>(chat_settings, chat_api_key(c), c.chat.path);
        providers::HttpSettings embed_settings{c.embedding.base_url, std::chrono::seconds(c.embedding.timeout_s),
                                               c.embedding.max_in_flight, {}};
        embedding = std::make_shared<providers::HttpEmbeddingProvider>(embed_settings, c.embedding.batch_size);
    }
    set.chat = std::make_shared<providers::CachingChatProvider>(
        chat, std::make_shared<providers::JsonlCache>(c.chat_cache));
    set.embedding = std::make_shared<providers::CachingEmbeddingProvider>(
        embedding, std::make_shared<providers::JsonlCache>(c.embedding_cache));
    return set;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

void print_ranking(std::ostream& out, const eval::BugRun& run) {
    out << pad("rank", 6) << pad("provenance", 20) << "method\n";
    for (std::size_t i = 0; i < run.ranking.entries.size(); ++i) {
        const auto& e = run.ranking.entries[i];
        out << pad(std::to_string(i + 1), 6) << pad(std::string(rerank::to_string(e.provenance)), 20) << e.method_id
            << '\n';
    }
}

void print_summary_header(std::ostream& out, std::string_view first) {
    out << pad(std::string(first), 16) << pad("bugs", 6) << pad("failed", 8) << pad("top1", 6) << pad("top3", 6)
        << pad("top5", 6) << pad("map", 8) << pad("mrr", 8) << "cost_usd\n";
}

void print_summary_row(std::ostream& out, std::string_view label, const eval::EvalSummary& s) {
    out << pad(std::string(label), 16) << pad(std::to_string(s.n_bugs), 6) << pad(std::to_string(s.n_failed), 8)
        << pad(std::to_string(s.top_n.at(1)), 6) << pad(std::to_string(s.top_n.at(3)), 6)
        << pad(std::to_string(s.top_n.at(5)), 6) << pad(fixed(s.map_score, 4), 8) << pad(fixed(s.mrr, 4), 8)
        << fixed(s.cost_usd, 6) << '\n';
}

void report_failures(std::ostream& err, const eval::BatchResult& result) {
    for (const auto& o : result.outcomes) {
        if (!o.ok) err << "bug " << o.bug_id << " failed: " << o.error << '\n';
    }
}

int cmd_localize(const CommonFlags& flags, const std::string& bug_dir, std::ostream& out, std::ostream& err) {
    const auto config = effective_config(flags);
    const auto bug = eval::load_bug_case(bug_dir);
    auto providers = make_providers(config, {bug});
    const auto run = eval::localize(bug, config.pipeline, providers.view());

    const fs::path dir(flags.out_dir);
    write_file(dir / "ranking.jsonl", rerank::final_ranking_jsonl(run.ranking));
    write_file(dir / "query.txt", run.query_text);
    write_file(dir / "retrieval.jsonl", retrieval::retrieval_dump(run.bug_id, run.retrieved, run.retriever));
    ordered_json manifest;
    manifest["config"] = to_json(config);
    manifest["bug_id"] = run.bug_id;
    manifest["usage"] = {{"input_tokens", run.usage.input_tokens}, {"output_tokens", run.usage.output_tokens}};
    manifest["cost_usd"] = eval::cost_usd(run.usage, config.pipeline.prices);
    manifest["providers"] = providers.stats();
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");

    for (const auto& u : run.unresolved_coverage) err << "unresolved covered method: " << u.key.to_string() << '\n';
    print_ranking(out, run);
    return 0;
}

int cmd_evaluate(const CommonFlags& flags, const std::string& bugset, std::ostream& out, std::ostream& err) {
    const auto config = effective_config(flags);
    const auto bugs = eval::load_bugset(bugset);
    auto providers = make_providers(config, bugs);
    const auto result = eval::evaluate(bugs, config.pipeline, providers.view(), config.workers);
    report_failures(err, result);
    eval::write_run_directory(flags.out_dir, bugs, result, to_json(config), {{"providers", providers.stats()}});
    print_summary_header(out, "variant");
    print_summary_row(out, eval::to_string(config.pipeline.variant), result.summary);
    return result.summary.n_bugs > 0 ? 0 : kExitFailure;
}

int cmd_ablate(const CommonFlags& flags, const std::string& bugset, const std::vector<std::string>& names,
               std::ostream& out, std::ostream& err) {
    const auto config = effective_config(flags);
    std::vector<eval::Variant> variants;
    if (names.empty()) {
        variants.assign(std::begin(eval::kAllVariants), std::end(eval::kAllVariants));
    } else {
        for (const auto& n : names) variants.push_back(eval::variant_from_string(n));
    }
    const auto bugs = eval::load_bugset(bugset);
    auto providers = make_providers(config, bugs);

    ordered_json table = ordered_json::object();
    bool any_ok = false;
    print_summary_header(out, "variant");
    for (auto v : variants) {
        auto c = config;
        c.pipeline.variant = v;
        const auto result = eval::evaluate(bugs, c.pipeline, providers.view(), c.workers);
        report_failures(err, result);
        const fs::path dir = fs::path(flags.out_dir) / std::string(eval::to_string(v));
        eval::write_run_directory(dir, bugs, result, to_json(c), {{"providers", providers.stats()}});
        table[std::string(eval::to_string(v))] = nlohmann::ordered_json::parse(eval::summary_json(result.summary));
        print_summary_row(out, eval::to_string(v), result.summary);
        any_ok = any_ok || result.summary.n_bugs > 0;
    }
    write_file(fs::path(flags.out_dir) / "ablation.json", table.dump(2) + "\n");
    return any_ok ? 0 : kExitFailure;
}

int cmd_sweep(const CommonFlags& flags, const std::string& bugset, const std::vector<std::size_t>& ks,
              std::ostream& out, std::ostream&) {
    const auto config = effective_config(flags);
    const auto bugs = eval::load_bugset(bugset);
    auto providers = make_providers(config, bugs);
    const auto sweep = eval::sensitivity_sweep(bugs, config.pipeline, providers.view(), ks, config.workers);

    ordered_json j;
    j["config"] = to_json(config);
    ordered_json per_k = ordered_json::object();
    print_summary_header(out, "k");
    for (const auto& [k, s] : sweep) {
        per_k[std::to_string(k)] = nlohmann::ordered_json::parse(eval::summary_json(s));
        print_summary_row(out, std::to_string(k), s);
    }
    const auto variation = eval::top1_variation(sweep);
    j["summaries"] = std::move(per_k);
    j["top1_variation"] = variation;
    write_file(fs::path(flags.out_dir) / "sweep.json", j.dump(2) + "\n");
    out << "top1 variation across k: " << variation << '\n';
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Method-level fault localization from failing tests", "funcloc"};
    app.require_subcommand(1);

    CommonFlags localize_flags, evaluate_flags, ablate_flags, sweep_flags;
    std::string bug_dir, evaluate_bugset, ablate_bugset, sweep_bugset;
    std::vector<std::string> variants;
    std::vector<std::size_t> k_values{20, 40, 60};

    auto* localize = app.add_subcommand("localize", "rank suspicious methods for one bug");
    add_common(*localize, localize_flags);
    localize->add_option("--bug", bug_dir, "bug directory containing bug.json")->required();

    auto* evaluate = app.add_subcommand("evaluate", "run one variant over a bug set and score it");
    add_common(*evaluate, evaluate_flags);
    evaluate->add_option("--bugset", evaluate_bugset, "directory of bug directories")->required();

    auto* ablate = app.add_subcommand("ablate", "compare pipeline variants over a bug set");
    add_common(*ablate, ablate_flags);
    ablate->add_option("--bugset", ablate_bugset, "directory of bug directories")->required();
    ablate->add_option("--variants", variants, "subset of variants to run")->delimiter(',');

    auto* sweep = app.add_subcommand("sweep", "vary the retrieval depth");
    add_common(*sweep, sweep_flags);
    sweep->add_option("--bugset", sweep_bugset, "directory of bug directories")->required();
    sweep->add_option("--k-values", k_values, "retrieval depths to compare")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : kExitUsage;
    }

    try {
        if (*localize) return cmd_localize(localize_flags, bug_dir, out, err);
        if (*evaluate) return cmd_evaluate(evaluate_flags, evaluate_bugset, out, err);
        if (*ablate) return cmd_ablate(ablate_flags, ablate_bugset, variants, out, err);
        return cmd_sweep(sweep_flags, sweep_bugset, k_values, out, err);
    } catch (const Error& e) {
        err << "funcloc: " << e.what() << '\n';
        return e.code() == ErrorCode::InvalidConfig ? kExitUsage : kExitFailure;
    } catch (const std::exception& e) {
        err << "funcloc: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace funcloc::cli
