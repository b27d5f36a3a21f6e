// SPDX-License-Identifier: Apache-2.0
#include "funcloc/run_config.hpp"

#include "funcloc/error.hpp"
#include "funcloc/util.hpp"

#include <algorithm>
#include <cstdlib>

namespace funcloc {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

bool mentions_inline_key(const json& j) {
    if (j.is_object()) {
        for (const auto& [key, value] : j.items()) {
            if (key == "api_key" || mentions_inline_key(value)) return true;
        }
    } else if (j.is_array()) {
        for (const auto& v : j) {
            if (mentions_inline_key(v)) return true;
        }
    }
    return false;
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> known, std::string_view where) {
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw Error(ErrorCode::InvalidConfig, "unknown setting '" + std::string(where) + key + "'");
        }
    }
}

std::string resolve_path(const std::filesystem::path& base, const std::string& p) {
    if (p.empty() || base.empty() || std::filesystem::path(p).is_absolute()) return p;
    return (base / p).lexically_normal().string();
}

}  // namespace

void RunConfig::validate() const {
    pipeline.validate();
    if (workers < 1) throw Error(ErrorCode::InvalidConfig, "workers must be at least 1");
    if (chat.max_in_flight < 1 || embedding.max_in_flight < 1) {
        throw Error(ErrorCode::InvalidConfig, "max_in_flight must be at least 1");
    }
    if (embedding.batch_size < 1) throw Error(ErrorCode::InvalidConfig, "embedding.batch_size must be at least 1");
    if (chat.timeout_s < 1 || embedding.timeout_s < 1) throw Error(ErrorCode::InvalidConfig, "timeouts must be positive");
    if (chat.max_retries < 0) throw Error(ErrorCode::InvalidConfig, "chat.max_retries must be non-negative");
    if (mock_providers) return;
    if (chat.base_url.empty()) throw Error(ErrorCode::InvalidConfig, "chat.base_url is required without mock providers");
    if (embedding.base_url.empty()) {
        throw Error(ErrorCode::InvalidConfig, "embedding.base_url is required without mock providers");
    }
}

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
    if (mentions_inline_key(doc)) {
        throw Error(ErrorCode::InvalidConfig,
                    "inline API keys are not accepted; name an environment variable in chat.api_key_env");
    }
    reject_unknown(doc, {"pipeline", "chat", "embedding", "cache", "workers", "seed", "mock_providers"}, "");

    RunConfig c;
    try {
        if (doc.contains("pipeline")) c.pipeline = eval::pipeline_config_from_json(doc.at("pipeline"));
        if (doc.contains("chat")) {
            const auto& j = doc.at("chat");
            reject_unknown(j, {"base_url", "path", "api_key_env", "max_in_flight", "timeout_s", "max_retries"}, "chat.");
            c.chat.base_url = j.value("base_url", c.chat.base_url);
            c.chat.path = j.value("path", c.chat.path);
            c.chat.api_key_env = j.value("api_key_env", c.chat.api_key_env);
            c.chat.max_in_flight = j.value("max_in_flight", c.chat.max_in_flight);
            c.chat.timeout_s = j.value("timeout_s", c.chat.timeout_s);
            c.chat.max_retries = j.value("max_retries", c.chat.max_retries);
        }
        if (doc.contains("embedding")) {
            const auto& j = doc.at("embedding");
            reject_unknown(j, {"base_url", "max_in_flight", "timeout_s", "batch_size"}, "embedding.");
            c.embedding.base_url = j.value("base_url", c.embedding.base_url);
            c.embedding.max_in_flight = j.value("max_in_flight", c.embedding.max_in_flight);
            c.embedding.timeout_s = j.value("timeout_s", c.embedding.timeout_s);
            c.embedding.batch_size = j.value("batch_size", c.embedding.batch_size);
        }
        if (doc.contains("cache")) {
            const auto& j = doc.at("cache");
            reject_unknown(j, {"chat", "embeddings"}, "cache.");
            c.chat_cache = resolve_path(base_dir, j.value("chat", std::string()));
            c.embedding_cache = resolve_path(base_dir, j.value("embeddings", std::string()));
        }
        c.workers = doc.value("workers", c.workers);
        c.seed = doc.value("seed", c.seed);
        c.mock_providers = doc.value("mock_providers", c.mock_providers);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    return parse_run_config(read_file(path), path.parent_path());
}

ordered_json to_json(const RunConfig& c) {
    ordered_json j;
    j["pipeline"] = eval::to_json(c.pipeline);
    j["chat"] = {{"base_url", c.chat.base_url},           {"path", c.chat.path},
                 {"api_key_env", c.chat.api_key_env},     {"max_in_flight", c.chat.max_in_flight},
                 {"timeout_s", c.chat.timeout_s},         {"max_retries", c.chat.max_retries}};
    j["embedding"] = {{"base_url", c.embedding.base_url},
                      {"max_in_flight", c.embedding.max_in_flight},
                      {"timeout_s", c.embedding.timeout_s},
                      {"batch_size", c.embedding.batch_size}};
    j["cache"] = {{"chat", c.chat_cache}, {"embeddings", c.embedding_cache}};
    j["workers"] = c.workers;
    j["seed"] = c.seed;
    j["mock_providers"] = c.mock_providers;
    return j;
}

std::string chat_api_key(const RunConfig& config) {
    if (config.chat.api_key_env.empty()) return {};
    const char* value = std::getenv(config.chat.api_key_env.c_str());
    if (!value || !*value) {
        throw Error(ErrorCode::InvalidConfig,
                    "environment variable " + config.chat.api_key_env + " (chat.api_key_env) is not set");
    }
    return value;
}

}  // namespace funcloc
